#ifndef TAYLORLAW_POINT_PATTERNS_HPP
#define TAYLORLAW_POINT_PATTERNS_HPP

// Point patterns on the unit torus: Poisson (random), Thomas cluster
// (aggregated) and Matern type-II hardcore (regular) generators, quadrat
// counts, pair correlation estimation and its power-law fit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "taylorlaw/abundance_io.hpp"
#include "taylorlaw/csv.hpp"
#include "taylorlaw/error.hpp"
#include "taylorlaw/mv_extraction.hpp"
#include "taylorlaw/powerlaw_fit.hpp"

namespace taylorlaw {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct PointPattern {
  std::vector<Point> points;
  std::string generator;
  std::uint64_t seed = 0;
};

using Engine = boost::random::mt19937_64;

/// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sub-seed for one simulation cell: the base seed folded with each index
/// in turn through mix64.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> indexes) {
  std::uint64_t h = mix64(seed);
  for (auto i : indexes) h = mix64(h ^ mix64(i + 0x632BE59BD9B4E019ULL));
  return h;
}

inline double torus_delta(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

inline double torus_distance(const Point& p, const Point& q) {
  const double dx = torus_delta(p.x, q.x);
  const double dy = torus_delta(p.y, q.y);
  return std::sqrt(dx * dx + dy * dy);
}

namespace detail {

inline double wrap_unit(double v) {
  double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

inline Point uniform_point(Engine& rng) {
  boost::random::uniform_01<double> u;
  const double x = u(rng);
  const double y = u(rng);
  return {x, y};
}

inline long poisson_count(Engine& rng, double mean) {
  boost::random::poisson_distribution<long, double> dist(mean);
  return dist(rng);
}

inline void require_positive(double v, std::string_view name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

}  // namespace detail

/// Homogeneous Poisson process on the unit torus.
inline PointPattern simulate_poisson(double intensity, std::uint64_t seed) {
  detail::require_positive(intensity, "intensity");
  Engine rng(seed);
  PointPattern pattern{{}, "poisson(intensity=" + csv::format12(intensity) + ")", seed};
  const long n = detail::poisson_count(rng, intensity);
  pattern.points.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) pattern.points.push_back(detail::uniform_point(rng));
  return pattern;
}

/// Thomas cluster process: Poisson parents, Poisson(mean_offspring)
/// offspring per parent with isotropic Gaussian displacement, wrapped onto
/// the torus. Only offspring are kept.
inline PointPattern simulate_thomas(double parent_intensity, double mean_offspring, double sigma,
                                    std::uint64_t seed) {
  detail::require_positive(parent_intensity, "parent_intensity");
  detail::require_positive(mean_offspring, "mean_offspring");
  detail::require_positive(sigma, "sigma");
  Engine rng(seed);
  PointPattern pattern{{},
                       "thomas(parent_intensity=" + csv::format12(parent_intensity) +
                           ",mean_offspring=" + csv::format12(mean_offspring) + ",sigma=" + csv::format12(sigma) + ")",
                       seed};
  boost::random::normal_distribution<double> offset(0.0, sigma);
  const long parents = detail::poisson_count(rng, parent_intensity);
  for (long p = 0; p < parents; ++p) {
    const Point centre = detail::uniform_point(rng);
    const long k = detail::poisson_count(rng, mean_offspring);
    for (long j = 0; j < k; ++j) {
      const double dx = offset(rng);
      const double dy = offset(rng);
      pattern.points.push_back({detail::wrap_unit(centre.x + dx), detail::wrap_unit(centre.y + dy)});
    }
  }
  return pattern;
}

/// Matern type-II hardcore process: each Poisson proposal gets a uniform
/// mark and survives iff no other proposal closer than the hardcore radius
/// carries a smaller mark.
inline PointPattern simulate_hardcore(double proposal_intensity, double hardcore_radius, std::uint64_t seed) {
  detail::require_positive(proposal_intensity, "proposal_intensity");
  if (!(hardcore_radius > 0.0 && hardcore_radius < 0.5)) throw DomainError("hardcore_radius must lie in (0, 0.5)");
  Engine rng(seed);
  PointPattern pattern{{},
                       "hardcore(proposal_intensity=" + csv::format12(proposal_intensity) +
                           ",radius=" + csv::format12(hardcore_radius) + ")",
                       seed};
  const auto n = static_cast<std::size_t>(detail::poisson_count(rng, proposal_intensity));
  std::vector<Point> proposals(n);
  for (auto& p : proposals) p = detail::uniform_point(rng);
  std::vector<double> marks(n);
  boost::random::uniform_01<double> u;
  for (auto& m : marks) m = u(rng);

  // Bucket grid with cell side >= radius; neighbours lie in the 3x3 block.
  const auto cells = static_cast<std::size_t>(std::floor(1.0 / hardcore_radius));
  std::vector<std::vector<std::size_t>> buckets(cells * cells);
  auto cell_of = [&](double v) { return std::min(static_cast<std::size_t>(v * static_cast<double>(cells)), cells - 1); };
  for (std::size_t i = 0; i < n; ++i) buckets[cell_of(proposals[i].x) * cells + cell_of(proposals[i].y)].push_back(i);

  auto thinned = [&](std::size_t i, const std::vector<std::size_t>& candidates) {
    for (auto j : candidates)
      if (j != i && marks[j] < marks[i] && torus_distance(proposals[i], proposals[j]) < hardcore_radius) return true;
    return false;
  };

  std::vector<std::size_t> all;
  if (cells < 3)
    for (std::size_t j = 0; j < n; ++j) all.push_back(j);

  for (std::size_t i = 0; i < n; ++i) {
    bool removed = false;
    if (cells < 3) {
      removed = thinned(i, all);
    } else {
      const auto cx = cell_of(proposals[i].x);
      const auto cy = cell_of(proposals[i].y);
      for (std::size_t ox = 0; ox < 3 && !removed; ++ox)
        for (std::size_t oy = 0; oy < 3 && !removed; ++oy) {
          const auto bx = (cx + cells + ox - 1) % cells;
          const auto by = (cy + cells + oy - 1) % cells;
          removed = thinned(i, buckets[bx * cells + by]);
        }
    }
    if (!removed) pattern.points.push_back(proposals[i]);
  }
  return pattern;
}

struct QuadratCounts {
  std::size_t q = 1;
  std::vector<long> counts;  // q x q, counts[i * q + j] for x-cell i, y-cell j

  long at(std::size_t i, std::size_t j) const { return counts.at(i * q + j); }
};

inline QuadratCounts quadrat_counts(const PointPattern& pattern, std::size_t q) {
  if (q < 1) throw UsageError("quadrat grid size q must be >= 1");
  QuadratCounts out{q, std::vector<long>(q * q, 0)};
  const auto qd = static_cast<double>(q);
  for (const auto& p : pattern.points) {
    const auto i = std::min(static_cast<std::size_t>(std::floor(p.x * qd)), q - 1);
    const auto j = std::min(static_cast<std::size_t>(std::floor(p.y * qd)), q - 1);
    ++out.counts[i * q + j];
  }
  return out;
}

struct PcfEstimate {
  std::vector<double> radii;  // bin centres
  std::vector<double> g;
  double bin_width = 0.0;
  std::size_t n_points = 0;
};

/// Ring estimator on the unit torus. For bins lying inside r < 0.5 the
/// probability that a uniform pair falls in [r - w/2, r + w/2) is exactly
/// 2 pi r w, so no edge correction is needed.
inline PcfEstimate estimate_pcf(const PointPattern& pattern, double bin_width, double r_max) {
  const auto n = pattern.points.size();
  if (n < 2) throw DataError("insufficient data: pair correlation needs at least 2 points, got " + std::to_string(n));
  if (!(r_max > 0.0 && r_max < 0.5)) throw UsageError("r_max must lie in (0, 0.5)");
  if (!(bin_width > 0.0 && bin_width < r_max)) throw UsageError("bin_width must lie in (0, r_max)");
  const auto bins = static_cast<std::size_t>(std::floor(r_max / bin_width * (1.0 + 1e-12)));
  const double limit = static_cast<double>(bins) * bin_width;

  std::vector<double> pair_counts(bins, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = torus_distance(pattern.points[i], pattern.points[j]);
      if (d < limit) pair_counts[std::min(static_cast<std::size_t>(d / bin_width), bins - 1)] += 1.0;
    }

  PcfEstimate est;
  est.bin_width = bin_width;
  est.n_points = n;
  const double total_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double r = (static_cast<double>(k) + 0.5) * bin_width;
    est.radii.push_back(r);
    est.g.push_back(pair_counts[k] / (total_pairs * 2.0 * std::numbers::pi * r * bin_width));
  }
  return est;
}

enum class PcfForm {
  paper_form,  // 1 + g(r) = (r0 / r)^s
  xi_form      // g(r) - 1 = (r0 / r)^s
};

inline constexpr std::string_view to_string(PcfForm f) { return f == PcfForm::paper_form ? "paper_form" : "xi_form"; }

inline std::optional<PcfForm> pcf_form_from_string(std::string_view s) {
  if (s == "paper_form") return PcfForm::paper_form;
  if (s == "xi_form") return PcfForm::xi_form;
  return std::nullopt;
}

struct PcfFit {
  double r0 = 0.0;
  double s = 0.0;
  PcfForm form = PcfForm::paper_form;
  double r_squared = 0.0;
  std::size_t n_used = 0;
};

/// Log-log regression on ln r: slope = -s, intercept = s ln r0.
inline PcfFit fit_pcf(const PcfEstimate& est, PcfForm form) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < est.radii.size(); ++k) {
    const double g = est.g[k];
    if (form == PcfForm::paper_form) {
      if (!(g > -1.0)) continue;
      y.push_back(std::log1p(g));
    } else {
      if (!(g > 1.0)) continue;
      y.push_back(std::log(g - 1.0));
    }
    x.push_back(std::log(est.radii[k]));
  }
  if (x.size() < 3)
    throw DataError("insufficient signal: " + std::to_string(x.size()) + " usable bins for " +
                    std::string(to_string(form)) + ", need 3");
  const auto line = detail::fit_line(x, y);
  PcfFit fit;
  fit.form = form;
  fit.s = -line.slope;
  fit.r_squared = line.r_squared;
  fit.n_used = x.size();
  if (fit.s == 0.0) throw DataError("insufficient signal: flat pair correlation, r0 undefined");
  fit.r0 = std::exp(line.intercept / fit.s);
  if (!(fit.r0 > 0.0) || !std::isfinite(fit.r0))
    throw DataError("insufficient signal: r0 = exp(" + csv::format12(line.intercept / fit.s) + ") out of range");
  return fit;
}

enum class ExperimentKind { poisson_sweep, thomas_cluster_sweep, hardcore_sweep };

inline constexpr std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::poisson_sweep: return "poisson_sweep";
    case ExperimentKind::thomas_cluster_sweep: return "thomas_cluster_sweep";
    case ExperimentKind::hardcore_sweep: return "hardcore_sweep";
  }
  return "unknown";
}

inline std::optional<ExperimentKind> experiment_kind_from_string(std::string_view s) {
  for (auto k : {ExperimentKind::poisson_sweep, ExperimentKind::thomas_cluster_sweep, ExperimentKind::hardcore_sweep})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::poisson_sweep;
  std::vector<double> levels;
  std::size_t reps = 10;
  std::size_t q = 16;
  std::uint64_t seed = 0;
  double thomas_parent_intensity = 20.0;
  double thomas_sigma = 0.02;
  double hardcore_radius = 0.02;
};

inline PointPattern simulate_level(const ExperimentConfig& cfg, std::size_t level_index, std::size_t rep) {
  const double level = cfg.levels.at(level_index);
  const auto seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cfg.kind), level_index, rep});
  switch (cfg.kind) {
    case ExperimentKind::poisson_sweep: return simulate_poisson(level, seed);
    case ExperimentKind::thomas_cluster_sweep:
      return simulate_thomas(cfg.thomas_parent_intensity, level, cfg.thomas_sigma, seed);
    case ExperimentKind::hardcore_sweep: return simulate_hardcore(level, cfg.hardcore_radius, seed);
  }
  throw UsageError("unknown experiment kind");
}

/// Pooled quadrat counts: one column per level, one row per (replicate,
/// quadrat) cell, labelled "rep<r>:q<i>,<j>".
inline AbundanceTable experiment_counts(const ExperimentConfig& cfg) {
  if (cfg.levels.empty()) throw UsageError("experiment needs at least one level");
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    if (!(cfg.levels[i] > 0.0) || !std::isfinite(cfg.levels[i])) throw UsageError("experiment levels must be positive");
    if (i > 0 && !(cfg.levels[i] > cfg.levels[i - 1])) throw UsageError("experiment levels must be increasing");
  }
  if (cfg.reps < 1) throw UsageError("experiment reps must be >= 1");
  if (cfg.q < 1) throw UsageError("quadrat grid size q must be >= 1");

  const std::size_t cells = cfg.q * cfg.q;
  const std::size_t rows = cfg.reps * cells;
  const std::size_t cols = cfg.levels.size();
  std::vector<double> counts(rows * cols, 0.0);
  for (std::size_t l = 0; l < cols; ++l)
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      const auto qc = quadrat_counts(simulate_level(cfg, l, r), cfg.q);
      for (std::size_t c = 0; c < cells; ++c) counts[(r * cells + c) * cols + l] = static_cast<double>(qc.counts[c]);
    }

  std::vector<std::string> row_ids;
  row_ids.reserve(rows);
  for (std::size_t r = 0; r < cfg.reps; ++r)
    for (std::size_t i = 0; i < cfg.q; ++i)
      for (std::size_t j = 0; j < cfg.q; ++j)
        row_ids.push_back("rep" + std::to_string(r) + ":q" + std::to_string(i) + "," + std::to_string(j));
  std::vector<std::string> level_ids;
  for (double v : cfg.levels) level_ids.push_back(csv::format12(v));
  return AbundanceTable::create(std::move(row_ids), std::move(level_ids), std::nullopt, std::move(counts));
}

/// One (M, V) pair per level from the pooled quadrat counts.
inline MVSeries taylor_experiment(const ExperimentConfig& cfg) {
  return extract_pairs(experiment_counts(cfg), Scheme(SchemeTag::species_across_subjects));
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_POINT_PATTERNS_HPP
