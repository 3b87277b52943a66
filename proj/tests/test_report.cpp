#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "taylorlaw/report.hpp"

using namespace taylorlaw;

namespace {

std::size_t occurrences(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

MVSeries four_pairs_one_dropped() {
  MVSeries s{Scheme(SchemeTag::subjects_across_species), {}, 0};
  s.pairs = {{"s1", 1, 2}, {"s2", 4, 16}, {"s3", 16, 128}, {"s4&<x>", 0, 0}};
  return s;
}

}  // namespace

TEST(SvgPlot, ElementsAndCaption) {
  const auto series = four_pairs_one_dropped();
  const auto fit = fit_log_ols(series);
  const auto svg = svg_plot(series, fit);
  EXPECT_EQ(occurrences(svg, "<circle"), 3u);
  EXPECT_EQ(occurrences(svg, "<line"), 1u);
  EXPECT_EQ(occurrences(svg, "<rect class=\"dropped\""), 1u);
  EXPECT_NE(svg.find("dropped: 1"), std::string::npos);
  EXPECT_NE(svg.find("b = 1.5"), std::string::npos);
  EXPECT_NE(svg.find("s4&amp;&lt;x&gt;"), std::string::npos);
}

TEST(SvgPlot, EmitWritesFileOrNothing) {
  const auto series = four_pairs_one_dropped();
  const auto fit = fit_log_ols(series);
  EXPECT_NO_THROW(emit_svg_plot(series, fit, ""));
  const auto path = std::filesystem::temp_directory_path() / "taylorlaw_report_test.svg";
  emit_svg_plot(series, fit, path.string());
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(text, svg_plot(series, fit));
  std::filesystem::remove(path);
  EXPECT_THROW(emit_svg_plot(series, fit, "/nonexistent-dir/x.svg"), IoError);
}

TEST(FitReport, JsonIsCoherent) {
  const auto series = four_pairs_one_dropped();
  const auto report = make_fit_report(series, {});
  const auto j = to_json(report);
  EXPECT_EQ(j["scheme"]["tag"], "subjects_across_species");
  EXPECT_TRUE(j["scheme"]["subject"].is_null());
  EXPECT_EQ(j["fit"]["method"], "log_ols");
  EXPECT_EQ(j["fit"]["n_used"], 3);
  EXPECT_EQ(j["fit"]["n_dropped"], 1);
  EXPECT_DOUBLE_EQ(j["fit"]["b"].get<double>(), 1.5);
  EXPECT_TRUE(j["fit"]["rss_raw"].is_null());
  EXPECT_EQ(j["pacd"]["defined"], true);
  EXPECT_DOUBLE_EQ(j["pacd"]["m0"].get<double>(), 0.25);
  EXPECT_EQ(j["dropped_pair_labels"], Json::array({"s4&<x>"}));
  EXPECT_EQ(j["classification"]["dof"], 1);
  EXPECT_TRUE(j["classification_error"].is_null());
}

TEST(FitReport, MissingClassificationIsExplained) {
  auto report = make_fit_report(four_pairs_one_dropped(), {});
  report.classification.reset();
  report.classification_error = "degenerate fit: se_b = 0";
  const auto j = to_json(report);
  EXPECT_TRUE(j["classification"].is_null());
  EXPECT_EQ(j["classification_error"], "degenerate fit: se_b = 0");
  EXPECT_NE(to_csv_row(report).find(",,,,,s4&<x>"), std::string::npos) << to_csv_row(report);
}

// Refitting from the pairs as serialized in JSON reproduces the reported fit.
TEST(FitReport, RefitFromSerializedPairs) {
  MVSeries s{Scheme(SchemeTag::species_across_subjects), {}, 0};
  for (int i = 1; i <= 8; ++i)
    s.pairs.push_back({"p" + std::to_string(i), 1.0 * i * i, 1.3 * std::pow(i * i, 1.4) * (1 + 0.1 * (i % 3))});
  FitSettings nls;
  nls.method = FitMethod::nls;
  for (const auto& settings : {FitSettings{}, nls}) {
    const auto a = make_fit_report(s, settings);
    ASSERT_TRUE(a.classification.has_value());
    MVSeries again{s.scheme, {}, 0};
    for (const auto& p : s.pairs) {
      const auto j = to_json(p);
      again.pairs.push_back({j["label"], j["mean"].get<double>(), j["variance"].get<double>()});
    }
    const auto b = make_fit_report(again, settings);
    EXPECT_NEAR(b.fit.a, a.fit.a, 1e-9 * a.fit.a);
    EXPECT_NEAR(b.fit.b, a.fit.b, 1e-9);
    EXPECT_EQ(b.classification->pattern, a.classification->pattern);
    EXPECT_EQ(b.fit.n_used, a.fit.n_used);
  }
}

TEST(FitReport, CsvRowMatchesHeader) {
  const auto report = make_fit_report(four_pairs_one_dropped(), {});
  const auto header = fit_report_csv_header();
  const auto row = to_csv_row(report);
  EXPECT_EQ(occurrences(header, ","), occurrences(row, ","));
}

TEST(FitReport, NumbersAreRoundedAndNonFiniteIsNull) {
  EXPECT_TRUE(detail::number(std::nan("")).is_null());
  EXPECT_EQ(detail::number(0.1 + 0.2).dump(), "0.3");
}
