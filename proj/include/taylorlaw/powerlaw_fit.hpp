#ifndef TAYLORLAW_POWERLAW_FIT_HPP
#define TAYLORLAW_POWERLAW_FIT_HPP

// Fitting V = a * M^b to mean-variance pairs, the aggregation critical
// density m0 and the regular / random / aggregated classification.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "taylorlaw/error.hpp"
#include "taylorlaw/mv_extraction.hpp"
#include "taylorlaw/student_t.hpp"

namespace taylorlaw {

enum class FitMethod { log_ols, nls };

inline constexpr std::string_view to_string(FitMethod m) { return m == FitMethod::log_ols ? "log_ols" : "nls"; }

inline std::optional<FitMethod> fit_method_from_string(std::string_view s) {
  if (s == "log_ols") return FitMethod::log_ols;
  if (s == "nls") return FitMethod::nls;
  return std::nullopt;
}

struct PowerLawFit {
  double a = 1.0;
  double b = 1.0;
  double se_ln_a = 0.0;
  double se_b = 0.0;
  double r_squared = 0.0;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  FitMethod method = FitMethod::log_ols;
  std::optional<double> rss_log;  // log_ols only
  std::optional<double> rss_raw;  // nls only
  bool converged = true;
};

namespace detail {

/// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  double rss = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = x.size();
  if (n < 3 || y.size() != n) throw DataError("insufficient data: a line fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double xbar = sx / static_cast<double>(n);
  const double ybar = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    const double dy = y[i] - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw DataError("degenerate design: all x values are equal");

  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.rss += r * r;
  }
  const double s2 = fit.rss / static_cast<double>(n - 2);
  fit.se_slope = std::sqrt(s2 / sxx);
  fit.se_intercept = std::sqrt(s2 * (1.0 / static_cast<double>(n) + xbar * xbar / sxx));
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - fit.rss / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace detail

/// Pairs excluded by `method`: M <= 0 or V <= 0 for log_ols, M <= 0 for nls.
inline bool pair_is_dropped(const MVPair& p, FitMethod method) {
  return method == FitMethod::log_ols ? !(p.mean > 0.0 && p.variance > 0.0) : !(p.mean > 0.0);
}

inline std::vector<std::string> dropped_pair_labels(const MVSeries& series, FitMethod method) {
  std::vector<std::string> out;
  for (const auto& p : series.pairs)
    if (pair_is_dropped(p, method)) out.push_back(p.label);
  return out;
}

/// Least squares of ln V on ln M after dropping pairs with M <= 0 or V <= 0.
inline PowerLawFit fit_log_ols(const MVSeries& series, std::size_t min_pairs = 3) {
  if (min_pairs < 3) throw UsageError("min_pairs must be at least 3, got " + std::to_string(min_pairs));
  std::vector<double> x, y;
  for (const auto& p : series.pairs) {
    if (pair_is_dropped(p, FitMethod::log_ols)) continue;
    x.push_back(std::log(p.mean));
    y.push_back(std::log(p.variance));
  }
  if (x.size() < min_pairs)
    throw DataError("insufficient data: " + std::to_string(x.size()) + " usable pairs (M > 0, V > 0), need " +
                    std::to_string(min_pairs));
  detail::LineFit line;
  try {
    line = detail::fit_line(x, y);
  } catch (const DataError&) {
    throw DataError("degenerate design: all retained ln(M) values are equal");
  }

  PowerLawFit fit;
  fit.method = FitMethod::log_ols;
  fit.b = line.slope;
  fit.a = std::exp(line.intercept);
  fit.se_b = line.se_slope;
  fit.se_ln_a = line.se_intercept;
  fit.r_squared = line.r_squared;
  fit.n_used = x.size();
  fit.n_dropped = series.pairs.size() - x.size();
  fit.rss_log = line.rss;
  fit.converged = true;
  return fit;
}

struct NlsOptions {
  std::optional<std::pair<double, double>> init;  // (a, b)
  int max_iter = 200;
  double tol = 1e-10;
};

/// Levenberg-Marquardt minimization of sum (V - a M^b)^2 over (a, b).
///
/// Marquardt's diagonal scaling is used; the damping starts at 1e-3 and is
/// divided by 10 after an accepted step and multiplied by 10 after a
/// rejected one. Every trial step counts against `max_iter`. The fit is
/// reported as converged when an accepted step lowers the objective by a
/// relative amount below `tol` and the residual vector is numerically
/// orthogonal to both Jacobian columns, or when the residuals are at
/// rounding level. Running out of iterations, or stalling away from a
/// stationary point, returns converged = false.
inline PowerLawFit fit_nls(const MVSeries& series, const NlsOptions& opts = {}) {
  std::vector<double> ms, vs;
  for (const auto& p : series.pairs) {
    if (pair_is_dropped(p, FitMethod::nls)) continue;
    ms.push_back(p.mean);
    vs.push_back(p.variance);
  }
  const std::size_t n = ms.size();
  if (n < 3) throw DataError("insufficient data: " + std::to_string(n) + " pairs with M > 0, need 3");
  if (std::all_of(ms.begin(), ms.end(), [&](double m) { return m == ms.front(); }))
    throw DataError("degenerate design: all means are equal");

  std::vector<double> lnm(n);
  for (std::size_t i = 0; i < n; ++i) lnm[i] = std::log(ms[i]);

  double v_scale = 0.0;
  for (double v : vs) v_scale += v * v;
  const double floor_rss = 1e-30 * std::max(v_scale, std::numeric_limits<double>::min());
  constexpr double orthogonality_tol = 1e-4;
  constexpr double max_damping = 1e16;

  auto objective = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = vs[i] - a * std::pow(ms[i], b);
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
  };

  struct Normal {
    double aa = 0, ab = 0, bb = 0;  // J^T J
    double ga = 0, gb = 0;          // J^T r
    double rr = 0;                  // r^T r
  };
  auto normal_equations = [&](double a, double b) {
    Normal ne;
    for (std::size_t i = 0; i < n; ++i) {
      const double mb = std::pow(ms[i], b);
      const double ja = mb;
      const double jb = a * mb * lnm[i];
      const double r = vs[i] - a * mb;
      ne.aa += ja * ja;
      ne.ab += ja * jb;
      ne.bb += jb * jb;
      ne.ga += ja * r;
      ne.gb += jb * r;
      ne.rr += r * r;
    }
    return ne;
  };
  auto stationary = [&](const Normal& ne) {
    if (ne.rr <= floor_rss) return true;
    const double nr = std::sqrt(ne.rr);
    const double ca = ne.aa > 0 ? std::abs(ne.ga) / (std::sqrt(ne.aa) * nr) : 0.0;
    const double cb = ne.bb > 0 ? std::abs(ne.gb) / (std::sqrt(ne.bb) * nr) : 0.0;
    return std::max(ca, cb) <= orthogonality_tol;
  };

  double a = 1.0, b = 1.0;
  if (opts.init) {
    std::tie(a, b) = *opts.init;
    if (!(a > 0.0) || !std::isfinite(b)) throw UsageError("nls initial value needs a > 0 and finite b");
  } else {
    try {
      const auto ols = fit_log_ols(series);
      a = ols.a;
      b = ols.b;
    } catch (const DataError&) {
      a = 1.0;
      b = 1.0;
    }
  }
  double f = objective(a, b);
  if (!std::isfinite(f)) {
    a = 1.0;
    b = 1.0;
    f = objective(a, b);
  }

  bool converged = false;
  double damping = 1e-3;
  int iter = 0;
  while (iter < opts.max_iter && !converged) {
    const auto ne = normal_equations(a, b);
    if (ne.rr <= floor_rss) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (iter < opts.max_iter) {
      ++iter;
      const double m11 = ne.aa * (1.0 + damping);
      const double m22 = ne.bb * (1.0 + damping);
      const double m12 = ne.ab;
      const double det = m11 * m22 - m12 * m12;
      bool improved = false;
      if (det > 0.0 && std::isfinite(det)) {
        const double da = (m22 * ne.ga - m12 * ne.gb) / det;
        const double db = (m11 * ne.gb - m12 * ne.ga) / det;
        const double ta = a + da;
        const double tb = b + db;
        if (ta > 0.0 && std::isfinite(ta) && std::isfinite(tb)) {
          const double ft = objective(ta, tb);
          if (ft < f) {
            const double rel = (f - ft) / f;
            a = ta;
            b = tb;
            f = ft;
            damping = std::max(damping / 10.0, 1e-300);
            improved = true;
            if (rel < opts.tol && stationary(normal_equations(a, b))) converged = true;
          }
        }
      }
      if (improved) {
        accepted = true;
        break;
      }
      damping *= 10.0;
      if (damping > max_damping) break;
    }
    if (!accepted) {
      // No step lowers the objective: accept only a genuine stationary point.
      converged = stationary(normal_equations(a, b));
      break;
    }
  }

  PowerLawFit fit;
  fit.method = FitMethod::nls;
  fit.a = a;
  fit.b = b;
  fit.n_used = n;
  fit.n_dropped = series.pairs.size() - n;
  fit.rss_raw = f;
  fit.converged = converged;

  const auto ne = normal_equations(a, b);
  const double det = ne.aa * ne.bb - ne.ab * ne.ab;
  const double s2 = f / static_cast<double>(n - 2);
  if (det > 0.0 && std::isfinite(det)) {
    fit.se_b = std::sqrt(std::max(0.0, s2 * ne.aa / det));
    fit.se_ln_a = std::sqrt(std::max(0.0, s2 * ne.bb / det)) / a;
  } else {
    fit.se_b = std::numeric_limits<double>::quiet_NaN();
    fit.se_ln_a = std::numeric_limits<double>::quiet_NaN();
  }
  double vbar = 0.0;
  for (double v : vs) vbar += v;
  vbar /= static_cast<double>(n);
  double tss = 0.0;
  for (double v : vs) tss += (v - vbar) * (v - vbar);
  fit.r_squared = tss > 0.0 ? std::clamp(1.0 - f / tss, 0.0, 1.0) : (f <= floor_rss ? 1.0 : 0.0);
  return fit;
}

struct PacdResult {
  bool defined = false;
  double m0 = std::numeric_limits<double>::quiet_NaN();
  double ln_m0 = std::numeric_limits<double>::quiet_NaN();  // finite even when m0 over/underflows
  std::string reason;
};

/// Aggregation critical density m0 = exp(ln a / (1 - b)): the density at
/// which the fitted variance equals the mean.
inline PacdResult pacd(double a, double b) {
  if (!(a > 0.0)) throw DomainError("pacd: a must be positive");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (std::abs(b - 1.0) <= 1e-9) return {false, nan, nan, "b = 1: crossover density undefined"};
  const double ln_m0 = std::log(a) / (1.0 - b);
  return {true, std::exp(ln_m0), ln_m0, {}};
}

inline PacdResult pacd(const PowerLawFit& fit) { return pacd(fit.a, fit.b); }

enum class Pattern { aggregated, random, regular };

inline constexpr std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::aggregated: return "aggregated";
    case Pattern::random: return "random";
    case Pattern::regular: return "regular";
  }
  return "unknown";
}

struct Classification {
  Pattern pattern = Pattern::random;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  int dof = 1;
};

/// Two-sided t-test of b = 1; significance decides aggregated or regular.
inline Classification classify(double b, double se_b, std::size_t n_used, double alpha = 0.05) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (n_used < 3) throw DataError("classify: n_used must be at least 3");
  if (!std::isfinite(b) || !(se_b >= 0.0)) throw DataError("degenerate fit: slope or its standard error undefined");
  Classification c;
  c.alpha = alpha;
  c.dof = static_cast<int>(n_used - 2);
  if (se_b == 0.0) {
    if (b != 1.0) throw DataError("degenerate fit: se_b = 0");
    c.pattern = Pattern::random;
    c.t_statistic = 0.0;
    c.p_value = 1.0;
    return c;
  }
  c.t_statistic = (b - 1.0) / se_b;
  c.p_value = t_tail_probability(c.t_statistic, c.dof);
  if (c.p_value >= alpha)
    c.pattern = Pattern::random;
  else
    c.pattern = b > 1.0 ? Pattern::aggregated : Pattern::regular;
  return c;
}

inline Classification classify(const PowerLawFit& fit, double alpha = 0.05) {
  return classify(fit.b, fit.se_b, fit.n_used, alpha);
}

/// Pattern at a given density from the fitted variance-to-mean ratio
/// V/M = a * density^(b-1); ratio within 1e-9 of 1 is random.
inline Pattern classify_at_density(double a, double b, double density) {
  if (!(a > 0.0)) throw DomainError("classify_at_density: a must be positive");
  if (!(density > 0.0)) throw DomainError("classify_at_density: density must be positive");
  const double ratio = a * std::pow(density, b - 1.0);
  if (std::abs(ratio - 1.0) <= 1e-9) return Pattern::random;
  return ratio > 1.0 ? Pattern::aggregated : Pattern::regular;
}

inline Pattern classify_at_density(const PowerLawFit& fit, double density) {
  return classify_at_density(fit.a, fit.b, density);
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_POWERLAW_FIT_HPP
