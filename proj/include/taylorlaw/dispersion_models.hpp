#ifndef TAYLORLAW_DISPERSION_MODELS_HPP
#define TAYLORLAW_DISPERSION_MODELS_HPP

// Density-with-distance model N = exp(a + b x^c + d ln x) and the
// displacement rule Delta(R) = eps [(R0/R)^s - (R0/R)^t].

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "taylorlaw/csv.hpp"
#include "taylorlaw/error.hpp"

namespace taylorlaw {

struct DispersionFit {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;
  double rss_log = 0.0;
  std::size_t n_used = 0;
  bool profile_flat = false;
};

struct DispersionOptions {
  double c_max = 5.0;        // search interval is (0, c_max]
  double c_tolerance = 1e-8;
  int grid_points = 100;     // coarse scan used to bracket the global minimum
};

namespace detail {

struct InnerSolution {
  double a = 0.0, b = 0.0, d = 0.0, rss = 0.0;
};

/// For fixed c, (a, b, d) enter linearly: solve the 3-column least squares
/// problem on ln N exactly.
inline InnerSolution solve_dispersion_inner(std::span<const double> xs, std::span<const double> ln_n, double c) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::pow(xs[static_cast<std::size_t>(i)], c);
    design(i, 2) = std::log(xs[static_cast<std::size_t>(i)]);
    y(i) = ln_n[static_cast<std::size_t>(i)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw DataError("degenerate design: singular inner system at c = " + csv::format12(c));
  const Eigen::Vector3d coef = qr.solve(y);
  const Eigen::VectorXd resid = y - design * coef;
  return {coef(0), coef(1), coef(2), resid.squaredNorm()};
}

}  // namespace detail

/// Least squares of ln N on (1, x^c, ln x), profiled over c: a coarse grid
/// brackets the best c, then golden-section search refines it.
inline DispersionFit fit_dispersion(std::span<const double> xs, std::span<const double> ns,
                                    const DispersionOptions& opts = {}) {
  if (xs.size() != ns.size()) throw UsageError("fit_dispersion: x and N lengths differ");
  if (xs.size() < 4) throw DataError("insufficient data: need at least 4 points, got " + std::to_string(xs.size()));
  if (!(opts.c_max > 0.0) || opts.grid_points < 4) throw UsageError("fit_dispersion: invalid c search interval");
  std::vector<double> ln_n(ns.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i]))
      throw DomainError("ln undefined: x[" + std::to_string(i) + "] = " + csv::format12(xs[i]) + " is not positive");
    if (!(ns[i] > 0.0) || !std::isfinite(ns[i]))
      throw DomainError("ln undefined: N[" + std::to_string(i) + "] = " + csv::format12(ns[i]) + " is not positive");
    ln_n[i] = std::log(ns[i]);
  }
  if (std::set<double>(xs.begin(), xs.end()).size() < 4)
    throw DataError("degenerate design: need at least 4 distinct x values");

  auto rss_at = [&](double c) { return detail::solve_dispersion_inner(xs, ln_n, c).rss; };

  const int g = opts.grid_points;
  std::vector<double> grid;
  grid.push_back(opts.c_max * 1e-4);
  for (int k = 1; k <= g; ++k) grid.push_back(opts.c_max * k / g);
  std::vector<double> profile;
  for (double c : grid) profile.push_back(rss_at(c));

  const auto best = static_cast<std::size_t>(std::min_element(profile.begin(), profile.end()) - profile.begin());
  const double pmax = *std::max_element(profile.begin(), profile.end());
  const double pmin = profile[best];

  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = rss_at(x1);
  double f2 = rss_at(x2);
  while (hi - lo > opts.c_tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = rss_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = rss_at(x2);
    }
  }
  double c_best = f1 <= f2 ? x1 : x2;
  if (std::min(f1, f2) > pmin) c_best = grid[best];

  const auto sol = detail::solve_dispersion_inner(xs, ln_n, c_best);
  DispersionFit fit;
  fit.a = sol.a;
  fit.b = sol.b;
  fit.c = c_best;
  fit.d = sol.d;
  fit.rss_log = sol.rss;
  fit.n_used = xs.size();
  fit.profile_flat = (pmax - pmin) <= 1e-6 * pmax + 1e-20;
  return fit;
}

inline double predict_dispersion(const DispersionFit& fit, double x) {
  if (!(x > 0.0)) throw DomainError("predict_dispersion: x must be positive");
  return std::exp(fit.a + fit.b * std::pow(x, fit.c) + fit.d * std::log(x));
}

/// Parameters of the displacement rule; equilibrium separation r0 > 0, s != t.
class DeltaParams {
 public:
  DeltaParams(double epsilon, double s, double t, double r0) : epsilon_(epsilon), s_(s), t_(t), r0_(r0) {
    if (!(r0 > 0.0)) throw DomainError("delta model: r0 must be positive");
    if (s == t) throw DomainError("delta model: exponents s and t must differ");
  }
  double epsilon() const noexcept { return epsilon_; }
  double s() const noexcept { return s_; }
  double t() const noexcept { return t_; }
  double r0() const noexcept { return r0_; }

 private:
  double epsilon_, s_, t_, r0_;
};

inline double delta_displacement(const DeltaParams& p, double separation) {
  if (!(separation > 0.0)) throw DomainError("delta model: separation R must be positive");
  const double ratio = p.r0() / separation;
  return p.epsilon() * (std::pow(ratio, p.s()) - std::pow(ratio, p.t()));
}

/// The separation at which displacement vanishes; for s != t this is r0.
inline double delta_equilibrium(const DeltaParams& p) { return p.r0(); }

}  // namespace taylorlaw

#endif  // TAYLORLAW_DISPERSION_MODELS_HPP
