#include "tapertpa/spectrum_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <cmath>

#include "tapertpa/error.hpp"

namespace tpa::io {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("output directory does not exist: " + dir.string());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

std::string format_spectrum_csv(const SpectrumData& data) {
  std::string out = "detuning_mhz,transmission\n";
  char buf[96];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int n = std::snprintf(buf, sizeof buf, "%.12g,%.15g\n", data.detuning[i] / 1e6,
                                data.transmission[i]);
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

void write_spectrum_csv(const std::filesystem::path& path, const SpectrumData& data) {
  atomic_write(path, format_spectrum_csv(data));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  atomic_write(path, value.dump(2) + "\n");
}

IngestedSpectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file: " + path.string());
  IngestedSpectrum result;
  result.filename = path.filename().string();
  std::string line;
  int line_no = 0;
  bool have_header = false;
  double scale = 1e6;
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t);
    if (!have_header) {
      if (fields.size() != 2) {
        throw InputError(result.filename + " line " + std::to_string(line_no) +
                         ": header must have exactly two columns");
      }
      const std::string d = lower(fields[0]);
      const std::pair<const char*, double> known[] = {
          {"detuning_hz", 1.0}, {"detuning_khz", 1e3}, {"detuning_mhz", 1e6}, {"detuning_ghz", 1e9}};
      bool ok = false;
      for (const auto& [name, s] : known) {
        if (d == name) {
          scale = s;
          ok = true;
        }
      }
      if (!ok) {
        throw InputError(result.filename + " line " + std::to_string(line_no) +
                         ": first column must be detuning_hz, detuning_khz, detuning_mhz or detuning_ghz, got '" +
                         fields[0] + "'");
      }
      result.detuning_column = fields[0];
      result.transmission_column = fields[1];
      result.detuning_unit = scale == 1.0 ? "Hz" : scale == 1e3 ? "kHz" : scale == 1e6 ? "MHz" : "GHz";
      have_header = true;
      continue;
    }
    double x = 0.0, y = 0.0;
    if (fields.size() != 2 || !parse_double(fields[0], x) || !parse_double(fields[1], y)) {
      throw InputError(result.filename + " line " + std::to_string(line_no) +
                       ": malformed row '" + t + "'");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw InputError(result.filename + " line " + std::to_string(line_no) + ": non-finite value");
    }
    rows.emplace_back(x * scale, y);
  }
  if (!have_header) throw InputError(result.filename + ": missing header line");

  const bool sorted = std::is_sorted(rows.begin(), rows.end(),
                                     [](const auto& a, const auto& b) { return a.first < b.first; });
  if (!sorted) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    result.warnings.push_back("rows were not in increasing detuning order and have been sorted");
  }
  std::size_t duplicates = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < rows.size() && rows[j].first == rows[i].first) sum += rows[j++].second;
    duplicates += j - i - 1;
    result.data.detuning.push_back(rows[i].first);
    result.data.transmission.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  if (duplicates > 0) {
    result.warnings.push_back(std::to_string(duplicates) +
                              " duplicate detuning rows collapsed to their mean");
  }
  result.data.metadata = {{"source", result.filename},
                          {"detuning_column", result.detuning_column},
                          {"transmission_column", result.transmission_column},
                          {"detuning_unit", result.detuning_unit},
                          {"warnings", result.warnings}};
  result.data.validate();
  return result;
}

}  // namespace tpa::io
