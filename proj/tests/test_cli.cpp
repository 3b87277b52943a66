#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "taylorlaw/cli.hpp"

using namespace taylorlaw;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main_entry(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(TAYLORLAW_FIXTURE_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "taylorlaw_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, FitTaylorOnExactFixture) {
  const auto r = run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "subjects_across_species"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["layout"], "cross_sectional");
  const auto& fit = j["reports"][0]["fit"];
  EXPECT_NEAR(fit["a"].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(fit["b"].get<double>(), 1.5, 1e-9);
  EXPECT_NEAR(j["reports"][0]["pacd"]["m0"].get<double>(), 0.25, 1e-9);
}

TEST(Cli, FitTaylorNlsAndCsv) {
  const auto r = run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "subjects_across_species",
                      "--method", "nls", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), fit_report_csv_header());
  EXPECT_NE(r.out.find("subjects_across_species,,nls,2,1.5,"), std::string::npos) << r.out;
}

TEST(Cli, FitTaylorLongitudinalAllSubjects) {
  const auto r = run({"fit-taylor", "--input", fixture("longitudinal.csv"), "--scheme", "per_subject_time",
                      "--subject", "all", "--pairs"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["layout"], "longitudinal");
  ASSERT_EQ(j["reports"].size(), 3u);
  EXPECT_EQ(j["reports"][1]["scheme"]["subject"], "#401");
  EXPECT_EQ(j["reports"][1]["pairs"].size(), 4u);
}

TEST(Cli, PacdAndClassify) {
  auto r = run({"pacd", "--a", "2", "--b", "1.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["pacd"]["m0"].get<double>(), 0.25);
  r = run({"pacd", "--a", "2", "--b", "1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_FALSE(Json::parse(r.out)["pacd"]["defined"].get<bool>());
  r = run({"classify", "--b", "1.5", "--se-b", "0.1", "--n-used", "22", "--a", "2", "--density", "0.04"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["classification"]["pattern"], "aggregated");
  EXPECT_EQ(j["density_pattern"], "regular");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"no-such-command"}).code, 1);
  EXPECT_EQ(run({"pacd", "--a", "2"}).code, 1);
  EXPECT_EQ(run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "bogus"}).code, 1);
  EXPECT_EQ(run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "per_subject_time"}).code, 1);
  const auto missing = run({"fit-taylor", "--input", fixture("missing.csv"), "--scheme", "subjects_across_species"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.out.empty());
  EXPECT_NE(missing.err.find("error:"), std::string::npos);
  const auto bad = scratch("bad.csv");
  std::ofstream(bad) << "subject_id,a,b\ns1,1,-3\n";
  const auto r = run({"fit-taylor", "--input", bad.string(), "--scheme", "subjects_across_species"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("negative"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
}

// Normalizing and fitting an already normalized table give the same result.
TEST(Cli, NormalizeIsIdempotent) {
  const auto base = run({"fit-taylor", "--input", fixture("longitudinal.csv"), "--scheme",
                         "species_across_subjects", "--normalize"});
  ASSERT_EQ(base.code, 0) << base.err;
  const auto table = normalize_rows(parse_longitudinal(slurp(fixture("longitudinal.csv"))));
  const auto path = scratch("normalized.csv");
  std::ofstream(path, std::ios::binary) << to_csv(table);
  const auto again = run({"fit-taylor", "--input", path.string(), "--scheme", "species_across_subjects", "--normalize"});
  ASSERT_EQ(again.code, 0) << again.err;
  const auto a = Json::parse(base.out)["reports"][0]["fit"], b = Json::parse(again.out)["reports"][0]["fit"];
  EXPECT_NEAR(a["b"].get<double>(), b["b"].get<double>(), 1e-9);
  EXPECT_NEAR(a["a"].get<double>(), b["a"].get<double>(), 1e-9 * a["a"].get<double>());
}

TEST(Cli, PlotFiles) {
  const auto svg = scratch("plot.svg");
  fs::remove(svg);
  auto r = run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "subjects_across_species", "--plot",
                svg.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(svg));
  const auto dir = scratch("empty_plot");
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cwd = fs::current_path();
  fs::current_path(dir);
  r = run({"fit-taylor", "--input", fixture("exact_power.csv"), "--scheme", "subjects_across_species", "--plot", ""});
  fs::current_path(cwd);
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Cli, SimulateAndPcf) {
  auto r = run({"simulate", "--kind", "poisson", "--intensity", "200", "--seed", "3", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 4), "x,y\n");
  const auto pts = scratch("points.csv");
  std::ofstream(pts, std::ios::binary) << r.out;
  r = run({"pcf", "--input", pts.string(), "--form", "paper_form"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["radii"].size(), 25u);
  r = run({"pcf", "--kind", "thomas", "--seed", "5", "--form", "xi_form"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, FitDispersion) {
  const auto path = scratch("locations.csv");
  std::ofstream(path, std::ios::binary) << "species,l1,l2,l3,l4,l5\nsp,"
                                        << std::exp(1 - 0.5) << ',' << std::exp(1 - 1.0) << ','
                                        << std::exp(1 - 1.5) << ',' << std::exp(1 - 2.0) << ','
                                        << std::exp(1 - 2.5) << '\n';
  const auto r = run({"fit-dispersion", "--input", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto fit = Json::parse(r.out)["fits"][0];
  EXPECT_NEAR(fit["c"].get<double>(), 1.0, 1e-3);
}

TEST(Cli, SubprocessRunsAreByteIdentical) {
  const std::string exe = TAYLORLAW_CLI_PATH;
  const auto o1 = scratch("run1.json"), o2 = scratch("run2.json");
  for (const std::string& args : {std::string("experiment --kind thomas_cluster_sweep --reps 3 --seed 9"),
                                 "fit-taylor --input \"" + fixture("longitudinal.csv") +
                                     "\" --scheme per_subject_species --subject all --method nls"}) {
    ASSERT_EQ(std::system(("\"" + exe + "\" " + args + " > \"" + o1.string() + "\"").c_str()), 0);
    ASSERT_EQ(std::system(("\"" + exe + "\" " + args + " > \"" + o2.string() + "\"").c_str()), 0);
    const auto a = slurp(o1);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(o2));
  }
}
