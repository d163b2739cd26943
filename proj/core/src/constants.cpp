#include "tapertpa/constants.hpp"

#include <cstdlib>

#include "tapertpa/error.hpp"
#include "yaml_util.hpp"

namespace tpa {

using units::Dimension;

AtomicConstants load_constants(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("constants file not found: " + path.string());
  }
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("constants file " + path.string() + ": " + e.what());
  }
  const std::string ctx = path.filename().string();
  AtomicConstants c;
  c.version = detail::scalar<int>(root, "version", ctx);
  if (c.version != kConstantsVersion) {
    throw ConfigError(ctx + ": unsupported constants version " + std::to_string(c.version));
  }
  c.source = detail::scalar_or<std::string>(root, "source", ctx, "");
  c.d2_wavelength = detail::quantity(root, "d2_wavelength", Dimension::kLength, ctx);
  c.reference_line = detail::quantity(root, "reference_line", Dimension::kFrequency, ctx);
  c.intermediate_linewidth =
      detail::quantity(root, "intermediate_linewidth", Dimension::kFrequency, ctx);

  const YAML::Node isotopes = detail::require(root, "isotopes", ctx);
  for (std::size_t i = 0; i < isotopes.size(); ++i) {
    const YAML::Node n = isotopes[i];
    const std::string ictx = ctx + ".isotopes[" + std::to_string(i) + "]";
    vapor::Isotope iso;
    iso.name = detail::scalar<std::string>(n, "name", ictx);
    iso.mass = detail::quantity(n, "mass", Dimension::kMass, ictx);
    iso.abundance = detail::scalar<double>(n, "abundance", ictx);
    iso.nuclear_spin = detail::scalar<double>(n, "nuclear_spin", ictx);
    iso.ground_hyperfine_splitting =
        detail::quantity(n, "ground_hyperfine_splitting", Dimension::kFrequency, ictx);
    iso.d2_centroid_frequency =
        detail::quantity(n, "d2_centroid_frequency", Dimension::kFrequency, ictx);
    try {
      iso.validate();
    } catch (const InputError& e) {
      throw ConfigError(ictx + ": " + e.what());
    }
    c.isotopes.push_back(iso);
  }

  const YAML::Node mat = detail::require(root, "core_material", ctx);
  const std::string mctx = ctx + ".core_material";
  const YAML::Node range = detail::require(mat, "valid_range", mctx);
  if (!range.IsSequence() || range.size() != 2) {
    throw ConfigError(mctx + ".valid_range must be [min, max]");
  }
  const double lo = units::parse_quantity(range[0].as<std::string>(), Dimension::kLength);
  const double hi = units::parse_quantity(range[1].as<std::string>(), Dimension::kLength);
  std::vector<optics::SellmeierTerm> terms;
  const YAML::Node t = detail::require(mat, "terms", mctx);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::string tctx = mctx + ".terms[" + std::to_string(i) + "]";
    const double b = detail::scalar<double>(t[i], "B", tctx);
    const double lr = detail::quantity(t[i], "resonance_wavelength", Dimension::kLength, tctx);
    const double lr_um = lr * 1e6;
    terms.push_back({b, lr_um * lr_um});
  }
  c.core_material = optics::SellmeierModel(detail::scalar<std::string>(mat, "name", mctx),
                                           std::move(terms), lo, hi);
  return c;
}

std::filesystem::path resolve_constants_path(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv(kConstantsEnvVar); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return fallback;
}

}  // namespace tpa
