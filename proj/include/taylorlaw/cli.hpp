#ifndef TAYLORLAW_CLI_HPP
#define TAYLORLAW_CLI_HPP

// Command-line front end. `run` executes a validated RunConfig and writes the
// report to `out` only after the whole command has succeeded; `main_entry`
// parses argv into a RunConfig first.
//
// Exit status: 0 success, 1 usage / configuration error, 2 data, domain or
// I/O error.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "taylorlaw/abundance_io.hpp"
#include "taylorlaw/dispersion_models.hpp"
#include "taylorlaw/error.hpp"
#include "taylorlaw/mv_extraction.hpp"
#include "taylorlaw/point_patterns.hpp"
#include "taylorlaw/powerlaw_fit.hpp"
#include "taylorlaw/report.hpp"

namespace taylorlaw::cli {

struct RunConfig {
  std::string command;  // fit-taylor, pacd, classify, fit-dispersion, simulate, pcf, experiment
  std::optional<std::string> input_path;
  std::optional<std::string> scheme;
  std::optional<std::string> subject;  // "all" fits every subject separately
  std::string layout = "auto";         // auto, cross_sectional, longitudinal
  std::string method = "log_ols";
  double alpha = 0.05;
  std::size_t min_pairs = 3;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::string output_format = "json";
  std::optional<std::string> plot_path;
  bool include_pairs = false;
  int max_iter = 200;
  double tol = 1e-10;

  // pacd / classify
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> se_b;
  std::optional<std::size_t> n_used;
  std::optional<double> density;

  // simulate / pcf / experiment
  std::optional<std::string> kind;
  std::optional<double> intensity;
  double parent_intensity = 20.0;
  double mean_offspring = 10.0;
  double sigma = 0.02;
  double radius = 0.02;
  std::optional<std::size_t> q;
  std::vector<double> levels;
  std::size_t reps = 10;
  double bin_width = 0.01;
  double r_max = 0.25;
  std::string form = "both";  // paper_form, xi_form, both

  // fit-dispersion
  std::optional<std::string> species;
  double c_max = 5.0;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const std::string& require(const std::optional<std::string>& v, const std::string& flag,
                                  const std::string& command) {
  if (!v) throw UsageError(command + ": " + flag + " is required");
  return *v;
}

inline double require(const std::optional<double>& v, const std::string& flag, const std::string& command) {
  if (!v) throw UsageError(command + ": " + flag + " is required");
  return *v;
}

inline bool json_output(const RunConfig& cfg) {
  if (cfg.output_format == "json") return true;
  if (cfg.output_format == "csv") return false;
  throw UsageError("--format must be json or csv, got '" + cfg.output_format + "'");
}

inline FitSettings fit_settings(const RunConfig& cfg) {
  FitSettings s;
  const auto method = fit_method_from_string(cfg.method);
  if (!method) throw UsageError("--method must be log_ols or nls, got '" + cfg.method + "'");
  s.method = *method;
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (cfg.min_pairs < 3) throw UsageError("--min-pairs must be at least 3");
  if (cfg.max_iter < 1) throw UsageError("--max-iter must be at least 1");
  if (!(cfg.tol > 0.0)) throw UsageError("--tol must be positive");
  s.alpha = cfg.alpha;
  s.min_pairs = cfg.min_pairs;
  s.nls.max_iter = cfg.max_iter;
  s.nls.tol = cfg.tol;
  return s;
}

inline void check_plot_path(const RunConfig& cfg) {
  if (!cfg.plot_path || cfg.plot_path->empty()) return;
  const auto& p = *cfg.plot_path;
  if (p.size() < 4 || p.substr(p.size() - 4) != ".svg") throw UsageError("--plot path must end with .svg");
}

inline std::string plot_path_for(const std::string& base, const std::string& subject) {
  std::string tag;
  for (char ch : subject) tag.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_');
  return base.substr(0, base.size() - 4) + "_" + tag + ".svg";
}

inline Json pairs_json(const MVSeries& series) {
  Json arr = Json::array();
  for (const auto& p : series.pairs) arr.push_back(to_json(p));
  return arr;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// --- commands -------------------------------------------------------------

inline std::string fit_taylor(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  const auto settings = fit_settings(cfg);
  check_plot_path(cfg);
  const auto& path = require(cfg.input_path, "--input", "fit-taylor");
  const auto& scheme_name = require(cfg.scheme, "--scheme", "fit-taylor");
  const auto tag = scheme_tag_from_string(scheme_name);
  if (!tag) throw UsageError("--scheme: unknown scheme '" + scheme_name + "'");
  if (requires_subject(*tag) && !cfg.subject) throw UsageError("--scheme " + scheme_name + " requires --subject");
  if (!requires_subject(*tag) && cfg.subject) throw UsageError("--subject is only valid with per_subject_* schemes");

  const auto text = read_file(path);
  std::string layout = cfg.layout;
  if (layout == "auto") {
    std::istringstream peek(text);
    const auto records = csv::read_records(peek);
    layout = !records.empty() && records.front().fields.size() > 1 && records.front().fields[1] == "time"
                 ? "longitudinal"
                 : "cross_sectional";
  }
  AbundanceTable table = layout == "longitudinal"      ? parse_longitudinal(text)
                         : layout == "cross_sectional" ? parse_cross_sectional(text)
                                                       : throw UsageError("--layout must be auto, cross_sectional or longitudinal");
  if (cfg.normalize) table = normalize_rows(table);

  std::vector<Scheme> schemes;
  if (requires_subject(*tag) && *cfg.subject == "all" && !table.has_subject("all")) {
    if (!table.has_times()) throw UsageError("--scheme " + scheme_name + " requires a table with a time column");
    for (const auto& s : table.subject_ids()) schemes.emplace_back(*tag, s);
  } else {
    schemes.emplace_back(*tag, cfg.subject);
  }

  std::vector<std::pair<MVSeries, FitReport>> results;
  for (const auto& scheme : schemes) {
    auto series = extract_pairs(table, scheme);
    try {
      auto report = make_fit_report(series, settings);
      series.n_dropped = report.fit.n_dropped;
      results.emplace_back(std::move(series), std::move(report));
    } catch (const DataError& e) {
      throw DataError(std::string(to_string(scheme.tag())) +
                      (scheme.subject() ? " (subject '" + *scheme.subject() + "')" : std::string()) + ": " + e.what());
    }
  }

  if (cfg.plot_path && !cfg.plot_path->empty()) {
    for (const auto& [series, report] : results) {
      const auto file = results.size() == 1 ? *cfg.plot_path : plot_path_for(*cfg.plot_path, *series.scheme.subject());
      emit_svg_plot(series, report.fit, file);
    }
  }

  if (!json) {
    std::string s = fit_report_csv_header() + "\n";
    for (const auto& [series, report] : results) s += to_csv_row(report) + "\n";
    return s;
  }
  Json j;
  j["command"] = "fit-taylor";
  j["input"] = path;
  j["layout"] = layout;
  j["normalize"] = cfg.normalize;
  Json reports = Json::array();
  for (const auto& [series, report] : results) {
    auto r = to_json(report);
    if (cfg.include_pairs) r["pairs"] = pairs_json(series);
    reports.push_back(std::move(r));
  }
  j["reports"] = std::move(reports);
  return dump(j);
}

inline std::string pacd_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  const double a = require(cfg.a, "--a", "pacd");
  const double b = require(cfg.b, "--b", "pacd");
  if (!(a > 0.0)) throw UsageError("pacd: --a must be positive");
  const auto res = pacd(a, b);
  if (!json) {
    return "a,b,defined,m0,reason\n" + csv::format12(a) + "," + csv::format12(b) + "," +
           (res.defined ? "true," + csv::format12(res.m0) + "," : "false,," + csv::quote_if_needed(res.reason)) + "\n";
  }
  Json j;
  j["command"] = "pacd";
  j["a"] = taylorlaw::detail::number(a);
  j["b"] = taylorlaw::detail::number(b);
  j["pacd"] = to_json(res);
  return dump(j);
}

inline std::string classify_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  const double b = require(cfg.b, "--b", "classify");
  const double se_b = require(cfg.se_b, "--se-b", "classify");
  if (!cfg.n_used) throw UsageError("classify: --n-used is required");
  if (*cfg.n_used < 3) throw UsageError("classify: --n-used must be at least 3");
  if (!(se_b >= 0.0)) throw UsageError("classify: --se-b must be non-negative");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const auto c = classify(b, se_b, *cfg.n_used, cfg.alpha);
  std::optional<Pattern> at_density;
  if (cfg.density) {
    const double a = require(cfg.a, "--a", "classify --density");
    if (!(a > 0.0)) throw UsageError("classify: --a must be positive");
    if (!(*cfg.density > 0.0)) throw UsageError("classify: --density must be positive");
    at_density = classify_at_density(a, b, *cfg.density);
  }
  if (!json) {
    std::string s = "b,se_b,n_used,pattern,t_statistic,p_value,alpha,dof,density,density_pattern\n";
    s += csv::format12(b) + "," + csv::format12(se_b) + "," + std::to_string(*cfg.n_used) + "," +
         std::string(to_string(c.pattern)) + "," + csv::format12(c.t_statistic) + "," + csv::format12(c.p_value) +
         "," + csv::format12(c.alpha) + "," + std::to_string(c.dof) + "," +
         (cfg.density ? csv::format12(*cfg.density) : std::string()) + "," +
         (at_density ? std::string(to_string(*at_density)) : std::string()) + "\n";
    return s;
  }
  Json j;
  j["command"] = "classify";
  j["b"] = taylorlaw::detail::number(b);
  j["se_b"] = taylorlaw::detail::number(se_b);
  j["n_used"] = *cfg.n_used;
  j["classification"] = to_json(c);
  if (at_density) {
    j["density"] = taylorlaw::detail::number(*cfg.density);
    j["density_pattern"] = std::string(to_string(*at_density));
  }
  return dump(j);
}

inline std::string fit_dispersion_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  const auto& path = require(cfg.input_path, "--input", "fit-dispersion");
  if (!(cfg.c_max > 0.0)) throw UsageError("--c-max must be positive");
  const auto table = parse_location(read_file(path));
  DispersionOptions opts;
  opts.c_max = cfg.c_max;

  std::vector<std::pair<std::string, DispersionFit>> fits;
  bool found = false;
  for (std::size_t s = 0; s < table.species_count(); ++s) {
    const auto& name = table.species_ids()[s];
    if (cfg.species && *cfg.species != name) continue;
    found = true;
    const auto row = table.row(s);
    for (std::size_t l = 0; l < row.size(); ++l)
      if (!(row[l] > 0.0))
        throw DomainError("species '" + name + "', location '" + table.location_labels()[l] +
                          "': count must be positive (ln undefined)");
    try {
      fits.emplace_back(name, fit_dispersion(table.distances(), row, opts));
    } catch (const Error& e) {
      throw DataError("species '" + name + "': " + e.what());
    }
  }
  if (cfg.species && !found) throw UsageError("--species: unknown species '" + *cfg.species + "'");

  if (!json) {
    std::string out = "species,a,b,c,d,rss_log,n_used,profile_flat\n";
    for (const auto& [name, f] : fits)
      out += csv::quote_if_needed(name) + "," + csv::format12(f.a) + "," + csv::format12(f.b) + "," +
             csv::format12(f.c) + "," + csv::format12(f.d) + "," + csv::format12(f.rss_log) + "," +
             std::to_string(f.n_used) + "," + (f.profile_flat ? "true" : "false") + "\n";
    return out;
  }
  Json j;
  j["command"] = "fit-dispersion";
  j["input"] = path;
  Json distances = Json::array();
  for (double d : table.distances()) distances.push_back(taylorlaw::detail::number(d));
  j["distances"] = std::move(distances);
  Json arr = Json::array();
  for (const auto& [name, f] : fits) {
    Json e;
    e["species"] = name;
    e["a"] = taylorlaw::detail::number(f.a);
    e["b"] = taylorlaw::detail::number(f.b);
    e["c"] = taylorlaw::detail::number(f.c);
    e["d"] = taylorlaw::detail::number(f.d);
    e["rss_log"] = taylorlaw::detail::number(f.rss_log);
    e["n_used"] = f.n_used;
    e["profile_flat"] = f.profile_flat;
    arr.push_back(std::move(e));
  }
  j["fits"] = std::move(arr);
  return dump(j);
}

inline PointPattern simulate_from(const RunConfig& cfg, const std::string& command) {
  const auto& kind = require(cfg.kind, "--kind", command);
  if (kind == "poisson") return simulate_poisson(cfg.intensity.value_or(100.0), cfg.seed);
  if (kind == "thomas") return simulate_thomas(cfg.parent_intensity, cfg.mean_offspring, cfg.sigma, cfg.seed);
  if (kind == "hardcore") {
    if (!(cfg.radius > 0.0 && cfg.radius < 0.5)) throw UsageError("--radius must lie in (0, 0.5)");
    return simulate_hardcore(cfg.intensity.value_or(200.0), cfg.radius, cfg.seed);
  }
  throw UsageError("--kind must be poisson, thomas or hardcore, got '" + kind + "'");
}

inline void check_sim_params(const RunConfig& cfg) {
  if (cfg.intensity && !(*cfg.intensity > 0.0)) throw UsageError("--intensity must be positive");
  if (!(cfg.parent_intensity > 0.0)) throw UsageError("--parent-intensity must be positive");
  if (!(cfg.mean_offspring > 0.0)) throw UsageError("--mean-offspring must be positive");
  if (!(cfg.sigma > 0.0)) throw UsageError("--sigma must be positive");
}

inline std::string simulate_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  check_sim_params(cfg);
  if (cfg.q && *cfg.q < 1) throw UsageError("--q must be at least 1");
  const auto pattern = simulate_from(cfg, "simulate");
  std::optional<QuadratCounts> qc;
  if (cfg.q) qc = quadrat_counts(pattern, *cfg.q);

  if (!json) {
    std::string s;
    if (qc) {
      s = "i,j,count\n";
      for (std::size_t i = 0; i < qc->q; ++i)
        for (std::size_t k = 0; k < qc->q; ++k)
          s += std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(qc->at(i, k)) + "\n";
    } else {
      s = "x,y\n";
      for (const auto& p : pattern.points) s += csv::format12(p.x) + "," + csv::format12(p.y) + "\n";
    }
    return s;
  }
  Json j;
  j["command"] = "simulate";
  j["generator"] = pattern.generator;
  j["seed"] = pattern.seed;
  j["n_points"] = pattern.points.size();
  Json pts = Json::array();
  for (const auto& p : pattern.points)
    pts.push_back(Json::array({taylorlaw::detail::number(p.x), taylorlaw::detail::number(p.y)}));
  j["points"] = std::move(pts);
  if (qc) {
    Json grid = Json::array();
    for (std::size_t i = 0; i < qc->q; ++i) {
      Json row = Json::array();
      for (std::size_t k = 0; k < qc->q; ++k) row.push_back(qc->at(i, k));
      grid.push_back(std::move(row));
    }
    j["quadrat_counts"] = {{"q", qc->q}, {"counts", std::move(grid)}};
  }
  return dump(j);
}

inline PointPattern read_points(const std::string& path) {
  std::istringstream in(read_file(path));
  const auto records = csv::read_records(in);
  if (records.empty() || records.front().fields != std::vector<std::string>{"x", "y"})
    throw ParseError("points file '" + path + "': header must be 'x,y'");
  PointPattern pattern{{}, "file(" + path + ")", 0};
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != 2)
      throw ParseError("line " + std::to_string(rec.line_no) + ": expected 2 fields, found " +
                       std::to_string(rec.fields.size()));
    const auto x = csv::parse_double(rec.fields[0]);
    const auto y = csv::parse_double(rec.fields[1]);
    if (!x || !y || *x < 0.0 || *x >= 1.0 || *y < 0.0 || *y >= 1.0)
      throw ParseError("line " + std::to_string(rec.line_no) + ": coordinates must be numbers in [0, 1)");
    pattern.points.push_back({*x, *y});
  }
  return pattern;
}

inline std::string pcf_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  std::vector<PcfForm> forms;
  if (cfg.form == "both")
    forms = {PcfForm::paper_form, PcfForm::xi_form};
  else if (const auto f = pcf_form_from_string(cfg.form))
    forms = {*f};
  else
    throw UsageError("--form must be paper_form, xi_form or both, got '" + cfg.form + "'");
  if (!(cfg.r_max > 0.0 && cfg.r_max < 0.5)) throw UsageError("--r-max must lie in (0, 0.5)");
  if (!(cfg.bin_width > 0.0 && cfg.bin_width < cfg.r_max)) throw UsageError("--bin-width must lie in (0, r_max)");
  check_sim_params(cfg);
  if (cfg.input_path && cfg.kind) throw UsageError("pcf: give either --input or --kind, not both");
  const auto pattern = cfg.input_path ? read_points(*cfg.input_path) : simulate_from(cfg, "pcf");
  const auto est = estimate_pcf(pattern, cfg.bin_width, cfg.r_max);

  struct FormResult {
    PcfForm form;
    std::optional<PcfFit> fit;
    std::string error;
  };
  std::vector<FormResult> results;
  for (auto f : forms) {
    try {
      results.push_back({f, fit_pcf(est, f), {}});
    } catch (const DataError& e) {
      results.push_back({f, std::nullopt, e.what()});
    }
  }

  if (!json) {
    std::string s;
    for (const auto& r : results) {
      s += "# " + std::string(to_string(r.form)) + ": ";
      if (r.fit)
        s += "r0=" + csv::format12(r.fit->r0) + " s=" + csv::format12(r.fit->s) + " r_squared=" +
             csv::format12(r.fit->r_squared) + " n_used=" + std::to_string(r.fit->n_used) + "\n";
      else
        s += r.error + "\n";
    }
    s += "r,g\n";
    for (std::size_t k = 0; k < est.radii.size(); ++k)
      s += csv::format12(est.radii[k]) + "," + csv::format12(est.g[k]) + "\n";
    return s;
  }
  Json j;
  j["command"] = "pcf";
  j["generator"] = pattern.generator;
  j["seed"] = pattern.seed;
  j["n_points"] = est.n_points;
  j["bin_width"] = taylorlaw::detail::number(est.bin_width);
  Json radii = Json::array(), g = Json::array();
  for (std::size_t k = 0; k < est.radii.size(); ++k) {
    radii.push_back(taylorlaw::detail::number(est.radii[k]));
    g.push_back(taylorlaw::detail::number(est.g[k]));
  }
  j["radii"] = std::move(radii);
  j["g"] = std::move(g);
  Json fits = Json::array();
  for (const auto& r : results) {
    Json e;
    e["form"] = std::string(to_string(r.form));
    if (r.fit) {
      e["r0"] = taylorlaw::detail::number(r.fit->r0);
      e["s"] = taylorlaw::detail::number(r.fit->s);
      e["r_squared"] = taylorlaw::detail::number(r.fit->r_squared);
      e["n_used"] = r.fit->n_used;
      e["error"] = nullptr;
    } else {
      e["r0"] = nullptr;
      e["s"] = nullptr;
      e["r_squared"] = nullptr;
      e["n_used"] = nullptr;
      e["error"] = r.error;
    }
    fits.push_back(std::move(e));
  }
  j["fits"] = std::move(fits);
  return dump(j);
}

inline std::vector<double> default_levels(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::poisson_sweep: return {25, 50, 100, 200, 400, 800};
    case ExperimentKind::thomas_cluster_sweep: return {2, 4, 8, 16, 32};
    case ExperimentKind::hardcore_sweep: return {200, 400, 800, 1600, 3200};
  }
  return {};
}

inline std::string experiment_command(const RunConfig& cfg) {
  const bool json = json_output(cfg);
  const auto settings = fit_settings(cfg);
  check_plot_path(cfg);
  const auto& kind_name = require(cfg.kind, "--kind", "experiment");
  const auto kind = experiment_kind_from_string(kind_name);
  if (!kind)
    throw UsageError("--kind must be poisson_sweep, thomas_cluster_sweep or hardcore_sweep, got '" + kind_name + "'");
  check_sim_params(cfg);
  if (!(cfg.radius > 0.0 && cfg.radius < 0.5)) throw UsageError("--radius must lie in (0, 0.5)");

  ExperimentConfig ec;
  ec.kind = *kind;
  ec.levels = cfg.levels.empty() ? default_levels(*kind) : cfg.levels;
  ec.reps = cfg.reps;
  ec.q = cfg.q.value_or(16);
  ec.seed = cfg.seed;
  ec.thomas_parent_intensity = cfg.parent_intensity;
  ec.thomas_sigma = cfg.sigma;
  ec.hardcore_radius = cfg.radius;

  auto series = taylor_experiment(ec);
  const auto report = make_fit_report(series, settings);
  series.n_dropped = report.fit.n_dropped;
  if (cfg.plot_path && !cfg.plot_path->empty()) emit_svg_plot(series, report.fit, *cfg.plot_path);

  if (!json) return fit_report_csv_header() + "\n" + to_csv_row(report) + "\n";
  Json j;
  j["command"] = "experiment";
  j["kind"] = std::string(to_string(ec.kind));
  Json levels = Json::array();
  for (double l : ec.levels) levels.push_back(taylorlaw::detail::number(l));
  j["levels"] = std::move(levels);
  j["reps"] = ec.reps;
  j["q"] = ec.q;
  j["seed"] = ec.seed;
  Json pairs = Json::array();
  for (const auto& p : series.pairs) {
    auto e = to_json(p);
    e["variance_to_mean"] = p.mean > 0.0 ? taylorlaw::detail::number(p.variance / p.mean) : Json(nullptr);
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["report"] = to_json(report);
  return dump(j);
}

}  // namespace detail

/// Executes one command. Output goes to `out` in full on success; error
/// messages go to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::string result;
    if (cfg.command == "fit-taylor")
      result = detail::fit_taylor(cfg);
    else if (cfg.command == "pacd")
      result = detail::pacd_command(cfg);
    else if (cfg.command == "classify")
      result = detail::classify_command(cfg);
    else if (cfg.command == "fit-dispersion")
      result = detail::fit_dispersion_command(cfg);
    else if (cfg.command == "simulate")
      result = detail::simulate_command(cfg);
    else if (cfg.command == "pcf")
      result = detail::pcf_command(cfg);
    else if (cfg.command == "experiment")
      result = detail::experiment_command(cfg);
    else
      throw UsageError("unknown command '" + cfg.command + "'");
    out << result;
    out.flush();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

namespace detail {

inline void add_format(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--format", cfg.output_format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

inline void add_fit_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--method", cfg.method, "Fitting method")->check(CLI::IsMember({"log_ols", "nls"}));
  sub->add_option("--alpha", cfg.alpha, "Significance level for the b = 1 test");
  sub->add_option("--min-pairs", cfg.min_pairs, "Minimum usable mean-variance pairs");
  sub->add_option("--max-iter", cfg.max_iter, "NLS iteration limit");
  sub->add_option("--tol", cfg.tol, "NLS relative objective tolerance");
  sub->add_option("--plot", cfg.plot_path, "Write the log-log panel to this .svg file");
}

inline void add_sim_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--intensity", cfg.intensity, "Poisson intensity / hardcore proposal intensity");
  sub->add_option("--parent-intensity", cfg.parent_intensity, "Thomas parent intensity");
  sub->add_option("--mean-offspring", cfg.mean_offspring, "Thomas mean offspring per parent");
  sub->add_option("--sigma", cfg.sigma, "Thomas offspring displacement std");
  sub->add_option("--radius", cfg.radius, "Hardcore radius");
  sub->add_option("--seed", cfg.seed, "Random seed");
}

}  // namespace detail

/// Parses `args` (without the program name) and runs the command.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Taylor's power law and spatial aggregation toolkit", "taylorlaw"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit-taylor", "Fit V = a M^b to an abundance table");
  fit->add_option("--input", cfg.input_path, "Abundance CSV")->required();
  fit->add_option("--scheme", cfg.scheme, "Extraction scheme")->required();
  fit->add_option("--subject", cfg.subject, "Subject for per_subject_* schemes, or 'all'");
  fit->add_option("--layout", cfg.layout, "Table layout")
      ->check(CLI::IsMember({"auto", "cross_sectional", "longitudinal"}));
  fit->add_flag("--normalize", cfg.normalize, "Divide every row by its total first");
  fit->add_flag("--pairs", cfg.include_pairs, "Include the mean-variance pairs in JSON output");
  detail::add_fit_options(fit, cfg);
  detail::add_format(fit, cfg);

  auto* pacd_cmd = app.add_subcommand("pacd", "Aggregation critical density m0 from a and b");
  pacd_cmd->add_option("--a", cfg.a, "Coefficient a")->required();
  pacd_cmd->add_option("--b", cfg.b, "Exponent b")->required();
  detail::add_format(pacd_cmd, cfg);

  auto* cls = app.add_subcommand("classify", "Classify a fitted exponent as aggregated / random / regular");
  cls->add_option("--b", cfg.b, "Exponent b")->required();
  cls->add_option("--se-b", cfg.se_b, "Standard error of b")->required();
  cls->add_option("--n-used", cfg.n_used, "Pairs used in the fit")->required();
  cls->add_option("--alpha", cfg.alpha, "Significance level");
  cls->add_option("--a", cfg.a, "Coefficient a (with --density)");
  cls->add_option("--density", cfg.density, "Also classify at this population density");
  detail::add_format(cls, cfg);

  auto* disp = app.add_subcommand("fit-dispersion", "Fit N = exp(a + b x^c + d ln x) per species");
  disp->add_option("--input", cfg.input_path, "Location CSV")->required();
  disp->add_option("--species", cfg.species, "Fit only this species");
  disp->add_option("--c-max", cfg.c_max, "Upper end of the c search interval");
  detail::add_format(disp, cfg);

  auto* sim = app.add_subcommand("simulate", "Simulate a point pattern on the unit torus");
  sim->add_option("--kind", cfg.kind, "poisson, thomas or hardcore")->required();
  detail::add_sim_options(sim, cfg);
  sim->add_option("--q", cfg.q, "Also report q x q quadrat counts");
  detail::add_format(sim, cfg);

  auto* pcf = app.add_subcommand("pcf", "Estimate and fit the pair correlation function");
  pcf->add_option("--input", cfg.input_path, "Points CSV with header x,y");
  pcf->add_option("--kind", cfg.kind, "Simulate instead: poisson, thomas or hardcore");
  detail::add_sim_options(pcf, cfg);
  pcf->add_option("--bin-width", cfg.bin_width, "Ring width");
  pcf->add_option("--r-max", cfg.r_max, "Largest radius (< 0.5)");
  pcf->add_option("--form", cfg.form, "paper_form, xi_form or both");
  detail::add_format(pcf, cfg);

  auto* exp = app.add_subcommand("experiment", "Quadrat-count Taylor experiment over simulated patterns");
  exp->add_option("--kind", cfg.kind, "poisson_sweep, thomas_cluster_sweep or hardcore_sweep")->required();
  exp->add_option("--levels", cfg.levels, "Comma-separated increasing levels")->delimiter(',');
  exp->add_option("--reps", cfg.reps, "Replicates per level");
  exp->add_option("--q", cfg.q, "Quadrat grid size (default 16)");
  detail::add_sim_options(exp, cfg);
  detail::add_fit_options(exp, cfg);
  detail::add_format(exp, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return run(cfg, out, err);
}

inline int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return main_entry(args, out, err);
}

}  // namespace taylorlaw::cli

#endif  // TAYLORLAW_CLI_HPP
