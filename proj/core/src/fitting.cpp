#include "tapertpa/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tapertpa/error.hpp"
#include "tapertpa/lineshape.hpp"

namespace tpa::fit {

namespace {

constexpr int kSeedCenters = 32;
constexpr int kSeedTau = 32;
constexpr double kSeedTauMin = 0.05e-9;
constexpr double kSeedTauMax = 50e-9;
constexpr double kPinnedFraction = 1e-6;
// Default tau0 range: the seed range widened by 2.5x below and 2x above.
constexpr double kTauBoundMin = 0.02e-9;
constexpr double kTauBoundMax = 100e-9;

using lineshape::BroadeningKernel;
using lineshape::DipProfile;

double min_spacing(const std::vector<double>& x) {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) h = std::min(h, x[i] - x[i - 1]);
  return h;
}

// Profile columns for a set of nonlinear parameters. Detuning is relative to
// the data origin so the problem is invariant under axis shifts.
class ModelEvaluator {
 public:
  ModelEvaluator(std::vector<double> x, double step, double extent)
      : x_(std::move(x)), step_(step), extent_(extent) {}

  const std::vector<double>& x() const { return x_; }

  // columns[i][k] = L(x_k - centers_i)
  void columns(const std::vector<double>& centers, double tau0, double lor, double gau,
               std::vector<std::vector<double>>& out) {
    if (!kernel_ || kernel_->lorentzian_hwhm() != lor || kernel_->gaussian_sigma() != gau) {
      kernel_.emplace(lor, gau, step_, extent_);
    }
    const DipProfile profile(tau0, *kernel_, extent_);
    out.resize(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
      out[i].resize(x_.size());
      profile.evaluate(x_, centers[i], out[i]);
    }
  }

  double profile_fwhm(double tau0, double lor, double gau) {
    if (!kernel_ || kernel_->lorentzian_hwhm() != lor || kernel_->gaussian_sigma() != gau) {
      kernel_.emplace(lor, gau, step_, extent_);
    }
    return DipProfile(tau0, *kernel_, extent_).fwhm();
  }

 private:
  std::vector<double> x_;
  double step_, extent_;
  std::optional<BroadeningKernel> kernel_;
};

struct LinearBounds {
  std::vector<double> lo, hi;  // index 0 baseline, 1.. depths
};

// Least squares for [baseline, depths] given profile columns; bounds handled
// by clamping the worst violator and re-solving the rest.
double solve_linear(const std::vector<double>& y, const std::vector<std::vector<double>>& cols,
                    const LinearBounds& bounds, std::vector<double>& coef) {
  const std::size_t n = y.size();
  const std::size_t p = cols.size() + 1;
  std::vector<bool> fixed(p, false);
  coef.assign(p, 0.0);
  auto column = [&](std::size_t j, std::size_t k) { return j == 0 ? 1.0 : -cols[j - 1][k]; };
  for (std::size_t pass = 0; pass <= p; ++pass) {
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < p; ++j) {
      if (!fixed[j]) free.push_back(j);
    }
    if (!free.empty()) {
      const std::size_t m = free.size();
      Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      Eigen::VectorXd atb = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      for (std::size_t k = 0; k < n; ++k) {
        double r = y[k];
        for (std::size_t j = 0; j < p; ++j) {
          if (fixed[j]) r -= coef[j] * column(j, k);
        }
        for (std::size_t a = 0; a < m; ++a) {
          const double ca = column(free[a], k);
          atb(static_cast<Eigen::Index>(a)) += ca * r;
          for (std::size_t b = a; b < m; ++b) {
            ata(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += ca * column(free[b], k);
          }
        }
      }
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < a; ++b) {
          ata(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
              ata(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
        }
      }
      const Eigen::VectorXd sol = ata.completeOrthogonalDecomposition().solve(atb);
      for (std::size_t a = 0; a < m; ++a) coef[free[a]] = sol(static_cast<Eigen::Index>(a));
    }
    // Clamp the largest violation, if any.
    double worst = 0.0;
    std::size_t worst_j = p;
    for (std::size_t j = 0; j < p; ++j) {
      if (fixed[j]) continue;
      const double v = std::max(bounds.lo[j] - coef[j], coef[j] - bounds.hi[j]);
      if (v > worst) {
        worst = v;
        worst_j = j;
      }
    }
    if (worst_j == p) break;
    coef[worst_j] = std::clamp(coef[worst_j], bounds.lo[worst_j], bounds.hi[worst_j]);
    fixed[worst_j] = true;
  }
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double m = 0.0;
    for (std::size_t j = 0; j < p; ++j) m += coef[j] * column(j, k);
    const double r = y[k] - m;
    ssr += r * r;
  }
  return ssr;
}

// Internal nonlinear coordinates: centers (Hz, origin-relative), log tau0,
// Lorentzian half-width, Gaussian sigma; only the free ones are in the simplex.
struct Layout {
  int n_dips = 1;
  bool tau = true, lor = false, gau = false;
  [[nodiscard]] int size() const { return n_dips + (tau ? 1 : 0) + (lor ? 1 : 0) + (gau ? 1 : 0); }
};

struct Problem {
  const FitModelSpec& spec;
  Layout layout;
  std::vector<double> y;
  ModelEvaluator eval;
  LinearBounds linear_bounds;
  std::vector<double> nl_lo, nl_hi;  // internal-coordinate bounds
  std::vector<bool> nl_user_bound;
  double fixed_tau0, fixed_lor, fixed_gau;
  double tau_lo, tau_hi;  // exp(log bound) can round outside the bound itself
  int evaluations = 0;
  std::vector<std::vector<double>> cols;
  std::vector<double> coef;

  struct Unpacked {
    std::vector<double> centers;
    double tau0, lor, gau;
  };

  Unpacked unpack(const std::vector<double>& v) const {
    Unpacked u;
    u.centers.assign(v.begin(), v.begin() + layout.n_dips);
    std::size_t i = static_cast<std::size_t>(layout.n_dips);
    u.tau0 = layout.tau ? std::clamp(std::exp(v[i++]), tau_lo, tau_hi) : fixed_tau0;
    u.lor = layout.lor ? v[i++] : fixed_lor;
    u.gau = layout.gau ? v[i++] : fixed_gau;
    return u;
  }

  void clamp(std::vector<double>& v) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], nl_lo[i], nl_hi[i]);
  }

  double objective(const std::vector<double>& v) {
    ++evaluations;
    const auto u = unpack(v);
    eval.columns(u.centers, u.tau0, u.lor, u.gau, cols);
    const double f = solve_linear(y, cols, linear_bounds, coef);
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
  }
};

struct SimplexOutcome {
  std::vector<double> best;
  double f_best = 0.0;
  bool converged = false;
};

// Nelder-Mead with projection onto the bound box. Stable ordering makes the
// lowest-index vertex win ties.
SimplexOutcome nelder_mead(Problem& prob, std::vector<double> start, const std::vector<double>& steps,
                           int budget, double tol, double floor, std::vector<double>& log) {
  const std::size_t n = start.size();
  struct Vertex {
    std::vector<double> x;
    double f;
  };
  std::vector<Vertex> s;
  prob.clamp(start);
  s.push_back({start, prob.objective(start)});
  for (std::size_t j = 0; j < n; ++j) {
    auto v = start;
    v[j] += steps[j];
    prob.clamp(v);
    if (v[j] == start[j]) {
      v[j] -= steps[j];
      prob.clamp(v);
    }
    s.push_back({v, prob.objective(v)});
  }
  const int start_evals = prob.evaluations;
  auto sort = [&] {
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  auto point = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = c[i] + t * (w[i] - c[i]);
    prob.clamp(p);
    return p;
  };
  sort();
  bool converged = false;
  while (true) {
    if (s.back().f - s.front().f <= tol * std::abs(s.front().f) + floor) {
      converged = true;
      break;
    }
    if (prob.evaluations - start_evals >= budget) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += s[k].x[i] / static_cast<double>(n);
    }
    const auto xr = point(centroid, s.back().x, -1.0);
    const double fr = prob.objective(xr);
    if (fr < s.front().f) {
      const auto xe = point(centroid, s.back().x, -2.0);
      const double fe = prob.objective(xe);
      s.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < s[n - 1].f) {
      s.back() = {xr, fr};
    } else {
      const bool outside = fr < s.back().f;
      const auto xc = outside ? point(centroid, xr, 0.5) : point(centroid, s.back().x, 0.5);
      const double fc = prob.objective(xc);
      if (fc < std::min(fr, s.back().f)) {
        s.back() = {xc, fc};
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          s[k].x = point(s.front().x, s[k].x, 0.5);
          s[k].f = prob.objective(s[k].x);
        }
      }
    }
    sort();
    log.push_back(s.front().f);
  }
  return {s.front().x, s.front().f, converged};
}

Bounds bound_or(const FitModelSpec& spec, const std::string& key, Bounds fallback, bool* user) {
  const auto it = spec.bounds.find(key);
  if (it == spec.bounds.end()) {
    if (user) *user = false;
    return fallback;
  }
  if (user) *user = true;
  return it->second;
}

}  // namespace

void FitModelSpec::validate() const {
  if (n_dips < 1) throw InputError("fit needs n_dips >= 1");
  for (const auto& [key, b] : bounds) {
    if (!(b.lo < b.hi)) throw InputError("bounds for '" + key + "' need lo < hi");
  }
  if (initial_guess) {
    if (static_cast<int>(initial_guess->centers.size()) != n_dips ||
        static_cast<int>(initial_guess->depths.size()) != n_dips) {
      throw InputError("initial guess must supply one center and depth per dip");
    }
    if (!(initial_guess->tau0 > 0.0)) throw InputError("initial guess tau0 must be > 0");
  }
  if (!fit_tau0 && !initial_guess) throw InputError("fixed tau0 requires an initial guess");
  if (max_evaluations < 1) throw InputError("max_evaluations must be >= 1");
}

std::vector<double> evaluate_model(const std::vector<double>& detuning, const FitParameters& p) {
  if (detuning.empty()) return {};
  const double step = detuning.size() > 1 ? min_spacing(detuning) : 1e6;
  double extent = detuning.back() - detuning.front() + step;
  for (double c : p.centers) {
    extent = std::max({extent, std::abs(detuning.front() - c), std::abs(detuning.back() - c)});
  }
  const BroadeningKernel kernel(p.lorentzian_width, p.gaussian_sigma, step, extent);
  const DipProfile profile(p.tau0, kernel, extent);
  std::vector<double> out(detuning.size(), p.baseline);
  for (std::size_t i = 0; i < p.centers.size(); ++i) {
    for (std::size_t k = 0; k < detuning.size(); ++k) {
      out[k] -= p.depths[i] * profile(detuning[k] - p.centers[i]);
    }
  }
  return out;
}

FitResult fit_cusp(const SpectrumData& data, const FitModelSpec& spec) {
  data.validate();
  spec.validate();
  const std::size_t n = data.size();
  const double origin = data.detuning.front();
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = data.detuning[k] - origin;
  const double span = x.back();
  const double step = min_spacing(x);

  Layout layout{spec.n_dips, spec.fit_tau0, spec.fit_lorentzian_width, spec.fit_gaussian_sigma};
  FitParameters defaults = spec.initial_guess.value_or(FitParameters{});
  if (spec.fixed_widths) {
    defaults.lorentzian_width = spec.fixed_widths->lorentzian_width;
    defaults.gaussian_sigma = spec.fixed_widths->gaussian_sigma;
  }
  Problem prob{spec, layout, data.transmission, ModelEvaluator(x, step, span + step),
               {}, {}, {}, {}, defaults.tau0, defaults.lorentzian_width, defaults.gaussian_sigma,
               kTauBoundMin, kTauBoundMax, 0, {}, {}};

  double ymax = 0.0, ysq = 0.0;
  for (double v : data.transmission) {
    ymax = std::max(ymax, std::abs(v));
    ysq += v * v;
  }
  const double scale = ymax > 0.0 ? ymax : 1.0;

  // Linear bounds.
  prob.linear_bounds.lo.push_back(bound_or(spec, "baseline", {-4.0 * scale, 4.0 * scale}, nullptr).lo);
  prob.linear_bounds.hi.push_back(bound_or(spec, "baseline", {-4.0 * scale, 4.0 * scale}, nullptr).hi);
  for (int i = 0; i < spec.n_dips; ++i) {
    const Bounds b = bound_or(spec, "depth" + std::to_string(i), {-4.0 * scale, 4.0 * scale}, nullptr);
    prob.linear_bounds.lo.push_back(b.lo);
    prob.linear_bounds.hi.push_back(b.hi);
  }
  // Nonlinear bounds in internal coordinates.
  std::vector<std::string> nl_names;
  for (int i = 0; i < spec.n_dips; ++i) {
    bool user = false;
    const Bounds b = bound_or(spec, "center" + std::to_string(i),
                              {data.detuning.front(), data.detuning.back()}, &user);
    prob.nl_lo.push_back(b.lo - origin);
    prob.nl_hi.push_back(b.hi - origin);
    prob.nl_user_bound.push_back(user);
    nl_names.push_back("center" + std::to_string(i));
  }
  if (layout.tau) {
    bool user = false;
    const Bounds b = bound_or(spec, "tau0", {kTauBoundMin, kTauBoundMax}, &user);
    if (!(b.lo > 0.0)) throw InputError("tau0 bounds must be positive");
    prob.nl_lo.push_back(std::log(b.lo));
    prob.nl_hi.push_back(std::log(b.hi));
    prob.tau_lo = b.lo;
    prob.tau_hi = b.hi;
    prob.nl_user_bound.push_back(user);
    nl_names.push_back("tau0");
  }
  if (layout.lor) {
    bool user = false;
    const Bounds b = bound_or(spec, "lorentzian_width", {0.0, span}, &user);
    prob.nl_lo.push_back(std::max(0.0, b.lo));
    prob.nl_hi.push_back(b.hi);
    prob.nl_user_bound.push_back(user);
    nl_names.push_back("lorentzian_width");
  }
  if (layout.gau) {
    bool user = false;
    const Bounds b = bound_or(spec, "gaussian_sigma", {0.0, span}, &user);
    prob.nl_lo.push_back(std::max(0.0, b.lo));
    prob.nl_hi.push_back(b.hi);
    prob.nl_user_bound.push_back(user);
    nl_names.push_back("gaussian_sigma");
  }

  FitResult result;

  // Seed.
  std::vector<double> start(static_cast<std::size_t>(layout.size()), 0.0);
  {
    std::size_t i = static_cast<std::size_t>(spec.n_dips);
    if (layout.tau) start[i++] = std::log(defaults.tau0);
    if (layout.lor) start[i++] = defaults.lorentzian_width;
    if (layout.gau) start[i++] = defaults.gaussian_sigma;
  }
  if (spec.initial_guess) {
    for (int d = 0; d < spec.n_dips; ++d) start[static_cast<std::size_t>(d)] = defaults.centers[static_cast<std::size_t>(d)] - origin;
  } else {
    std::vector<double> centers_grid(kSeedCenters);
    for (int c = 0; c < kSeedCenters; ++c) centers_grid[c] = span * c / (kSeedCenters - 1);
    std::vector<double> tau_grid;
    if (layout.tau) {
      for (int t = 0; t < kSeedTau; ++t) {
        tau_grid.push_back(std::log(kSeedTauMin) +
                           (std::log(kSeedTauMax) - std::log(kSeedTauMin)) * t / (kSeedTau - 1));
      }
    }
    const std::size_t tau_index = static_cast<std::size_t>(spec.n_dips);
    // Dips are seeded one at a time; the remaining dips sit at the first
    // center until their turn, with zero depth bound only by the solve.
    std::vector<double> trial = start;
    int active = 1;
    auto seed_objective = [&](std::vector<double> v) {
      // Dips not yet seeded are collapsed onto dip 0.
      for (int d = active; d < spec.n_dips; ++d) v[static_cast<std::size_t>(d)] = v[0];
      prob.clamp(v);
      return prob.objective(v);
    };
    for (int d = 0; d < spec.n_dips; ++d) {
      active = d + 1;
      double best = std::numeric_limits<double>::infinity();
      std::vector<double> best_v = trial;
      const bool search_tau = d == 0 && layout.tau;
      const std::size_t nt = search_tau ? tau_grid.size() : 1;
      for (double c : centers_grid) {
        for (std::size_t t = 0; t < nt; ++t) {
          auto v = trial;
          v[static_cast<std::size_t>(d)] = c;
          if (search_tau) v[tau_index] = tau_grid[t];
          const double f = seed_objective(v);
          if (f < best) {
            best = f;
            best_v = v;
          }
        }
      }
      trial = best_v;
    }
    start = trial;
  }
  prob.clamp(start);
  result.n_evaluations = prob.evaluations;

  // Simplex steps.
  const double tau_seed = layout.tau ? std::exp(start[static_cast<std::size_t>(spec.n_dips)]) : defaults.tau0;
  const double width_seed = std::max(lineshape::cusp_fwhm(tau_seed), 4.0 * step);
  std::vector<double> steps;
  for (int d = 0; d < spec.n_dips; ++d) steps.push_back(0.25 * width_seed);
  if (layout.tau) steps.push_back(0.1);
  if (layout.lor) steps.push_back(0.2 * width_seed);
  if (layout.gau) steps.push_back(0.2 * width_seed);

  // Coverage check against the seed width.
  for (int d = 0; d < spec.n_dips; ++d) {
    const double c = start[static_cast<std::size_t>(d)];
    if (c - 1.5 * width_seed < 0.0 || c + 1.5 * width_seed > span) {
      result.warnings.push_back("data window covers dip " + std::to_string(d) +
                                " by less than 3x its initial FWHM guess");
    }
  }

  const double floor = static_cast<double>(n) * (1e-14 * scale) * (1e-14 * scale) + 1e-30 * ysq;
  const int simplex_start = prob.evaluations;
  std::vector<double> log;
  SimplexOutcome out;
  if (layout.size() > 0) {
    out = nelder_mead(prob, start, steps, spec.max_evaluations, spec.tolerance, floor, log);
    // Restart from the optimum until a restart no longer improves it.
    for (int restart = 0; restart < 4 && out.converged; ++restart) {
      const int used = prob.evaluations - simplex_start;
      if (used >= spec.max_evaluations) break;
      auto small = steps;
      for (double& s : small) s *= 0.1;
      auto again = nelder_mead(prob, out.best, small, spec.max_evaluations - used, spec.tolerance,
                               floor, log);
      const bool improved = again.f_best < out.f_best - spec.tolerance * std::abs(out.f_best) - floor;
      if (again.f_best <= out.f_best) out = again;
      if (!improved) break;
    }
  } else {
    out.best = start;
    out.f_best = prob.objective(start);
    out.converged = true;
  }
  result.objective_log = std::move(log);

  // Final evaluation at the optimum to fill linear coefficients.
  const double f_final = prob.objective(out.best);
  result.n_evaluations = prob.evaluations;
  const auto u = prob.unpack(out.best);
  FitParameters p;
  p.baseline = prob.coef[0];
  p.centers.resize(u.centers.size());
  for (std::size_t i = 0; i < u.centers.size(); ++i) p.centers[i] = u.centers[i] + origin;
  p.depths.assign(prob.coef.begin() + 1, prob.coef.end());
  p.tau0 = u.tau0;
  p.lorentzian_width = u.lor;
  p.gaussian_sigma = u.gau;
  result.parameters = p;
  result.objective = f_final;
  result.rms_residual = std::sqrt(f_final / static_cast<double>(n));
  result.converged = out.converged;

  for (std::size_t i = 0; i < out.best.size(); ++i) {
    if (!prob.nl_user_bound[i]) continue;
    const double w = prob.nl_hi[i] - prob.nl_lo[i];
    if (out.best[i] - prob.nl_lo[i] <= kPinnedFraction * w || prob.nl_hi[i] - out.best[i] <= kPinnedFraction * w) {
      result.converged = false;
      result.warnings.push_back("parameter " + nl_names[i] + " is pinned at a user bound");
    }
  }

  // Model curve.
  result.detuning = data.detuning;
  result.model.assign(n, p.baseline);
  for (std::size_t i = 0; i < prob.cols.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) result.model[k] -= p.depths[i] * prob.cols[i][k];
  }

  // Free parameters and covariance from a finite-difference Jacobian.
  struct Free {
    std::string name;
    double value;
  };
  std::vector<Free> free{{"baseline", p.baseline}};
  for (int d = 0; d < spec.n_dips; ++d) free.push_back({"center" + std::to_string(d), p.centers[d]});
  for (int d = 0; d < spec.n_dips; ++d) free.push_back({"depth" + std::to_string(d), p.depths[d]});
  if (layout.tau) free.push_back({"tau0", p.tau0});
  if (layout.lor) free.push_back({"lorentzian_width", p.lorentzian_width});
  if (layout.gau) free.push_back({"gaussian_sigma", p.gaussian_sigma});
  const std::size_t np = free.size();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(np));
  for (std::size_t j = 0; j < np; ++j) {
    const auto& name = free[j].name;
    if (name == "baseline") {
      jac.col(static_cast<Eigen::Index>(j)).setOnes();
      continue;
    }
    if (name.rfind("depth", 0) == 0) {
      const std::size_t d = std::stoul(name.substr(5));
      for (std::size_t k = 0; k < n; ++k) jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = -prob.cols[d][k];
      continue;
    }
    double h;
    if (name.rfind("center", 0) == 0 || name == "lorentzian_width" || name == "gaussian_sigma") {
      h = 1e-4 * width_seed;
    } else {
      h = 1e-6 * p.tau0;
    }
    auto shifted = [&](double delta) {
      FitParameters q = p;
      if (name.rfind("center", 0) == 0) q.centers[std::stoul(name.substr(6))] += delta;
      else if (name == "tau0") q.tau0 += delta;
      else if (name == "lorentzian_width") q.lorentzian_width = std::max(0.0, q.lorentzian_width + delta);
      else q.gaussian_sigma = std::max(0.0, q.gaussian_sigma + delta);
      return evaluate_model(data.detuning, q);
    };
    const auto plus = shifted(h);
    const auto minus = shifted(-h);
    for (std::size_t k = 0; k < n; ++k) {
      jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = (plus[k] - minus[k]) / (2.0 * h);
    }
  }
  const double dof = std::max<double>(1.0, static_cast<double>(n) - static_cast<double>(np));
  const double s2 = f_final / dof;
  // Column scaling keeps the rank decision independent of parameter units.
  Eigen::VectorXd col_scale(static_cast<Eigen::Index>(np));
  for (Eigen::Index j = 0; j < col_scale.size(); ++j) {
    const double norm = jac.col(j).norm();
    col_scale(j) = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  const Eigen::MatrixXd js = jac * col_scale.asDiagonal();
  const Eigen::MatrixXd jtj = js.transpose() * js;
  const Eigen::MatrixXd cov = s2 * col_scale.asDiagonal() *
                              jtj.completeOrthogonalDecomposition().pseudoInverse() *
                              col_scale.asDiagonal();
  result.covariance_estimate.assign(np, std::vector<double>(np, 0.0));
  for (std::size_t a = 0; a < np; ++a) {
    result.names.push_back(free[a].name);
    result.values.push_back(free[a].value);
    result.uncertainties.push_back(std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)))));
    for (std::size_t b = 0; b < np; ++b) {
      result.covariance_estimate[a][b] = cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }

  result.model_fwhm_hz = prob.eval.profile_fwhm(p.tau0, p.lorentzian_width, p.gaussian_sigma);
  try {
    result.data_fwhm_hz = fwhm_numeric(data);
  } catch (const Error&) {
    result.data_fwhm_hz.reset();
  }
  if (result.converged) {
    result.fwhm_hz = result.model_fwhm_hz;
  } else {
    result.fwhm_hz = result.data_fwhm_hz.value_or(result.model_fwhm_hz);
  }
  return result;
}

double fwhm_numeric(const SpectrumData& data, std::optional<double> baseline) {
  if (data.detuning.size() != data.transmission.size() || data.detuning.size() < 3) {
    throw InputError("fwhm_numeric needs at least 3 matching samples");
  }
  const auto& x = data.detuning;
  const auto& y = data.transmission;
  const std::size_t n = y.size();
  const std::size_t imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const double base = baseline.value_or(std::max(y.front(), y.back()));
  if (!(y[imin] < base)) throw InputError("spectrum has no dip below its baseline");
  const double half = 0.5 * (base + y[imin]);
  if (imin == 0) throw InputError("no half-depth crossing on the left side");
  if (imin == n - 1) throw InputError("no half-depth crossing on the right side");
  std::size_t i = imin;
  while (i > 0 && y[i - 1] < half) --i;
  if (i == 0) throw InputError("no half-depth crossing on the left side");
  const double left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1]);
  std::size_t j = imin;
  while (j + 1 < n && y[j + 1] < half) ++j;
  if (j + 1 == n) throw InputError("no half-depth crossing on the right side");
  const double right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);
  return right - left;
}

ResidualReport residual_report(const SpectrumData& data, const FitResult& result) {
  if (data.detuning != result.detuning || result.model.size() != data.size()) {
    throw InputError("residual report: data grid does not match the fitted grid");
  }
  ResidualReport rep;
  const std::size_t n = data.size();
  rep.residuals.resize(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = data.transmission[k] - result.model[k];
    rep.residuals[k] = r;
    ss += r * r;
    rep.max_abs = std::max(rep.max_abs, std::abs(r));
  }
  rep.rms = std::sqrt(ss / static_cast<double>(n));
  int pos = 0, neg = 0, runs = 0, last = 0;
  for (double r : rep.residuals) {
    const int s = r > 0.0 ? 1 : (r < 0.0 ? -1 : 0);
    if (s == 0) continue;
    (s > 0 ? pos : neg) += 1;
    if (s != last) ++runs;
    last = s;
  }
  rep.runs = runs;
  const double tot = pos + neg;
  if (pos > 0 && neg > 0 && tot > 1) {
    const double mu = 2.0 * pos * neg / tot + 1.0;
    const double var = (mu - 1.0) * (mu - 2.0) / (tot - 1.0);
    rep.runs_z = var > 0.0 ? (runs - mu) / std::sqrt(var) : 0.0;
  }
  rep.data_fwhm_hz = result.data_fwhm_hz;
  rep.model_fwhm_hz = result.model_fwhm_hz;
  return rep;
}

std::string parameter_unit(const std::string& name) {
  if (name.rfind("center", 0) == 0 || name == "lorentzian_width" || name == "gaussian_sigma") return "Hz";
  if (name == "tau0") return "s";
  return "";
}

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    params.push_back({{"name", r.names[i]},
                      {"value", r.values[i]},
                      {"unit", parameter_unit(r.names[i])},
                      {"uncertainty", r.uncertainties[i]}});
  }
  nlohmann::json j = {
      {"parameters", params},
      {"baseline", r.parameters.baseline},
      {"centers_hz", r.parameters.centers},
      {"depths", r.parameters.depths},
      {"tau0_s", r.parameters.tau0},
      {"lorentzian_width_hz", r.parameters.lorentzian_width},
      {"gaussian_sigma_hz", r.parameters.gaussian_sigma},
      {"covariance", r.covariance_estimate},
      {"objective", r.objective},
      {"rms_residual", r.rms_residual},
      {"fwhm_hz", r.fwhm_hz},
      {"model_fwhm_hz", r.model_fwhm_hz},
      {"data_fwhm_hz", r.data_fwhm_hz ? nlohmann::json(*r.data_fwhm_hz) : nlohmann::json(nullptr)},
      {"converged", r.converged},
      {"n_evaluations", r.n_evaluations},
      {"warnings", r.warnings},
  };
  return j;
}

}  // namespace tpa::fit
