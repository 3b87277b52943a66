#ifndef TAYLORLAW_REPORT_HPP
#define TAYLORLAW_REPORT_HPP

// Fit reports, their JSON / CSV serialization and the log-log SVG panel.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "taylorlaw/csv.hpp"
#include "taylorlaw/error.hpp"
#include "taylorlaw/mv_extraction.hpp"
#include "taylorlaw/powerlaw_fit.hpp"

namespace taylorlaw {

using Json = nlohmann::ordered_json;

struct FitReport {
  Scheme scheme;
  PowerLawFit fit;
  PacdResult pacd;
  std::optional<Classification> classification;
  std::string classification_error;  // set when classification is absent
  std::vector<std::string> dropped_pair_labels;
};

struct FitSettings {
  FitMethod method = FitMethod::log_ols;
  double alpha = 0.05;
  std::size_t min_pairs = 3;
  NlsOptions nls;
};

/// Fit, PACD and classification of one series. A classification that is
/// undefined for the fit (zero slope error) is recorded, not thrown.
inline FitReport make_fit_report(const MVSeries& series, const FitSettings& settings) {
  if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (settings.min_pairs < 3) throw UsageError("min_pairs must be at least 3");
  PowerLawFit fit;
  if (settings.method == FitMethod::log_ols) {
    fit = fit_log_ols(series, settings.min_pairs);
  } else {
    fit = fit_nls(series, settings.nls);
    if (fit.n_used < settings.min_pairs)
      throw DataError("insufficient data: " + std::to_string(fit.n_used) + " pairs with M > 0, need " +
                      std::to_string(settings.min_pairs));
  }
  FitReport report{series.scheme, fit, pacd(fit), std::nullopt, {}, dropped_pair_labels(series, settings.method)};
  try {
    report.classification = classify(fit, settings.alpha);
  } catch (const DataError& e) {
    report.classification_error = e.what();
  }
  return report;
}

namespace detail {

inline Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return csv::round12(v);
}

inline Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const Scheme& s) {
  Json j;
  j["tag"] = std::string(to_string(s.tag()));
  j["subject"] = s.subject() ? Json(*s.subject()) : Json(nullptr);
  return j;
}

inline Json to_json(const PowerLawFit& f) {
  Json j;
  j["method"] = std::string(to_string(f.method));
  j["a"] = detail::number(f.a);
  j["b"] = detail::number(f.b);
  j["se_ln_a"] = detail::number(f.se_ln_a);
  j["se_b"] = detail::number(f.se_b);
  j["r_squared"] = detail::number(f.r_squared);
  j["n_used"] = f.n_used;
  j["n_dropped"] = f.n_dropped;
  j["rss_log"] = detail::optional_number(f.rss_log);
  j["rss_raw"] = detail::optional_number(f.rss_raw);
  j["converged"] = f.converged;
  return j;
}

inline Json to_json(const PacdResult& p) {
  Json j;
  j["defined"] = p.defined;
  j["m0"] = p.defined ? detail::number(p.m0) : Json(nullptr);
  j["ln_m0"] = p.defined ? detail::number(p.ln_m0) : Json(nullptr);
  j["reason"] = p.defined ? Json(nullptr) : Json(p.reason);
  return j;
}

inline Json to_json(const Classification& c) {
  Json j;
  j["pattern"] = std::string(to_string(c.pattern));
  j["t_statistic"] = detail::number(c.t_statistic);
  j["p_value"] = detail::number(c.p_value);
  j["alpha"] = detail::number(c.alpha);
  j["dof"] = c.dof;
  return j;
}

inline Json to_json(const MVPair& p) {
  Json j;
  j["label"] = p.label;
  j["mean"] = detail::number(p.mean);
  j["variance"] = detail::number(p.variance);
  return j;
}

inline Json to_json(const FitReport& r) {
  Json j;
  j["scheme"] = to_json(r.scheme);
  j["fit"] = to_json(r.fit);
  j["pacd"] = to_json(r.pacd);
  j["classification"] = r.classification ? to_json(*r.classification) : Json(nullptr);
  j["classification_error"] = r.classification ? Json(nullptr) : Json(r.classification_error);
  j["dropped_pair_labels"] = r.dropped_pair_labels;
  return j;
}

inline std::string fit_report_csv_header() {
  return "scheme,subject,method,a,b,se_ln_a,se_b,r_squared,n_used,n_dropped,rss_log,rss_raw,converged,"
         "pacd_defined,m0,pattern,t_statistic,p_value,alpha,dof,dropped_pair_labels";
}

inline std::string to_csv_row(const FitReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? csv::format12(*v) : std::string(); };
  std::ostringstream out;
  const auto& f = r.fit;
  out << to_string(r.scheme.tag()) << ',' << csv::quote_if_needed(r.scheme.subject().value_or("")) << ','
      << to_string(f.method) << ',' << csv::format12(f.a) << ',' << csv::format12(f.b) << ','
      << csv::format12(f.se_ln_a) << ',' << csv::format12(f.se_b) << ',' << csv::format12(f.r_squared) << ','
      << f.n_used << ',' << f.n_dropped << ',' << opt(f.rss_log) << ',' << opt(f.rss_raw) << ','
      << (f.converged ? "true" : "false") << ',' << (r.pacd.defined ? "true" : "false") << ','
      << (r.pacd.defined ? csv::format12(r.pacd.m0) : std::string()) << ',';
  if (r.classification) {
    const auto& c = *r.classification;
    out << to_string(c.pattern) << ',' << csv::format12(c.t_statistic) << ',' << csv::format12(c.p_value) << ','
        << csv::format12(c.alpha) << ',' << c.dof;
  } else {
    out << ",,,,";
  }
  std::string labels;
  for (std::size_t i = 0; i < r.dropped_pair_labels.size(); ++i) {
    if (i) labels += ';';
    labels += r.dropped_pair_labels[i];
  }
  out << ',' << csv::quote_if_needed(labels);
  return out.str();
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

}  // namespace detail

/// Log-log scatter of (ln M, ln V) with the fitted line. Pairs that cannot
/// be placed in log space are drawn as squares in the axis margin.
inline std::string svg_plot(const MVSeries& series, const PowerLawFit& fit) {
  constexpr double width = 640, height = 480;
  constexpr double left = 80, right = 30, top = 30, bottom = 90;
  constexpr double plot_w = width - left - right, plot_h = height - top - bottom;

  std::vector<std::pair<double, double>> used;
  std::vector<const MVPair*> dropped;
  for (const auto& p : series.pairs) {
    if (p.mean > 0.0 && p.variance > 0.0 && !pair_is_dropped(p, fit.method))
      used.emplace_back(std::log(p.mean), std::log(p.variance));
    else
      dropped.push_back(&p);
  }
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  std::vector<double> xs, ys;
  for (const auto& [x, y] : used) {
    xs.push_back(x);
    ys.push_back(y);
  }
  for (const auto* p : dropped) {
    if (p->mean > 0.0) xs.push_back(std::log(p->mean));
    if (p->variance > 0.0) ys.push_back(std::log(p->variance));
  }
  if (!xs.empty()) {
    xmin = *std::min_element(xs.begin(), xs.end());
    xmax = *std::max_element(xs.begin(), xs.end());
  }
  const double ln_a = std::log(fit.a);
  ys.push_back(ln_a + fit.b * xmin);
  ys.push_back(ln_a + fit.b * xmax);
  ymin = *std::min_element(ys.begin(), ys.end());
  ymax = *std::max_element(ys.begin(), ys.end());
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ostringstream svg;
  using detail::svg_num;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<path class=\"axis\" d=\"M" << left << ',' << top << " V" << top + plot_h << " H" << left + plot_w
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    svg << "<path class=\"tick\" d=\"M" << svg_num(px(xv)) << ',' << top + plot_h << " v5\" stroke=\"black\"/>"
        << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << top + plot_h + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << csv::format12(std::round(xv * 100) / 100) << "</text>\n";
    svg << "<path class=\"tick\" d=\"M" << left << ',' << svg_num(py(yv)) << " h-5\" stroke=\"black\"/>"
        << "<text x=\"" << left - 8 << "\" y=\"" << svg_num(py(yv) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << csv::format12(std::round(yv * 100) / 100) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h + 40
      << "\" font-size=\"13\" text-anchor=\"middle\">ln M (mean)</text>\n"
      << "<text x=\"20\" y=\"" << top + plot_h / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << top + plot_h / 2 << ")\">ln V (variance)</text>\n";

  for (const auto& [x, y] : used)
    svg << "<circle class=\"used\" cx=\"" << svg_num(px(x)) << "\" cy=\"" << svg_num(py(y))
        << "\" r=\"3.5\" fill=\"steelblue\"/>\n";
  for (const auto* p : dropped) {
    const double cx = p->mean > 0.0 ? px(std::log(p->mean)) : left - 14;
    const double cy = p->variance > 0.0 ? py(std::log(p->variance)) : top + plot_h + 28;
    svg << "<rect class=\"dropped\" x=\"" << svg_num(cx - 3) << "\" y=\"" << svg_num(cy - 3)
        << "\" width=\"6\" height=\"6\" fill=\"none\" stroke=\"firebrick\"><title>"
        << detail::xml_escape(p->label) << "</title></rect>\n";
  }
  const double x0 = xmin + xpad, x1 = xmax - xpad;
  svg << "<line class=\"fit\" x1=\"" << svg_num(px(x0)) << "\" y1=\"" << svg_num(py(ln_a + fit.b * x0)) << "\" x2=\""
      << svg_num(px(x1)) << "\" y2=\"" << svg_num(py(ln_a + fit.b * x1)) << "\" stroke=\"darkorange\" stroke-width=\"2\"/>\n";
  svg << "<text class=\"caption\" x=\"" << left << "\" y=\"" << height - 18 << "\" font-size=\"13\">"
      << "ln V = ln a + b ln M: a = " << csv::format12(fit.a) << ", b = " << csv::format12(fit.b)
      << ", r_squared = " << csv::format12(fit.r_squared) << ", dropped: " << fit.n_dropped << "</text>\n"
      << "</svg>\n";
  return svg.str();
}

inline void emit_svg_plot(const MVSeries& series, const PowerLawFit& fit, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write plot file '" + path + "'");
  out << svg_plot(series, fit);
  if (!out) throw IoError("failed writing plot file '" + path + "'");
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_REPORT_HPP
