#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "eki/config.hpp"
#include "eki/experiments.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eki_test_" + name);
  fs::remove_all(dir);
  return dir;
}

eki::ExperimentSpec small_spec(eki::Study study) {
  auto spec = eki::preset(study);
  spec.n_list = {1000, 10000};
  spec.replicates = 3;
  spec.model.particles = 64;
  spec.model.k_max = 5000;
  return spec;
}

TEST(Config, ParsesKeyValueLines) {
  const auto map = eki::parse_config_text("# comment\n  alpha = 1.5  \n\nseed=7 # trailing\n");
  ASSERT_EQ(map.size(), 2u);
  EXPECT_EQ(map.at("alpha"), "1.5");
  EXPECT_EQ(map.at("seed"), "7");
  EXPECT_THROW(eki::parse_config_text("alpha 1.5\n"), eki::InvalidArgument);
}

TEST(Config, AppliesAndRejects) {
  auto spec = eki::preset(eki::Study::kContraction);
  eki::apply_config(eki::parse_config_text("n = 500\ndim = 12\nprior_decay = half\nsign_convention = plus\n"), spec);
  EXPECT_EQ(spec.n_list, std::vector<std::size_t>{500});
  EXPECT_EQ(*spec.model.dim_override, 12u);
  EXPECT_EQ(spec.model.prior_decay, eki::PriorDecay::kHalf);
  EXPECT_EQ(spec.pullback.sign, eki::SignConvention::kPlus);
  eki::apply_config(eki::parse_config_text("dim = auto\n"), spec);
  EXPECT_FALSE(spec.model.dim_override.has_value());

  EXPECT_THROW(eki::apply_config(eki::parse_config_text("bogus = 1\n"), spec), eki::InvalidArgument);
  EXPECT_THROW(eki::apply_config(eki::parse_config_text("alpha = two\n"), spec), eki::InvalidArgument);
  EXPECT_THROW(eki::apply_config(eki::parse_config_text("particles = -3\n"), spec), eki::InvalidArgument);
  EXPECT_THROW(eki::apply_config(eki::parse_config_text("study = coverage\n"), spec), eki::InvalidArgument);
}

TEST(Config, ResolvedTextRoundTrips) {
  for (auto study : {eki::Study::kContraction, eki::Study::kCoverage, eki::Study::kFigure1, eki::Study::kOracle}) {
    auto spec = eki::preset(study);
    spec.model.dt = 0.0037;
    spec.model.kappa_constant = 0.75;
    const std::string text = eki::resolved_config_text(spec);
    auto back = eki::preset(study);
    back.model.dim_override.reset();
    eki::apply_config(eki::parse_config_text(text), back);
    EXPECT_EQ(eki::resolved_config_text(back), text);
  }
}

TEST(Config, ReadsFile) {
  const fs::path dir = scratch("config");
  eki::CsvTable::write_text(dir / "run.cfg", "replicates = 4\n");
  EXPECT_EQ(eki::read_config_file(dir / "run.cfg").at("replicates"), "4");
  EXPECT_THROW(eki::read_config_file(dir / "missing.cfg"), eki::InvalidArgument);
}

TEST(Statistics, MedianAndSlope) {
  EXPECT_DOUBLE_EQ(eki::median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(eki::median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(eki::median({}), eki::InvalidArgument);
  EXPECT_DOUBLE_EQ(eki::least_squares_slope({0.0, 1.0, 2.0}, {1.0, -1.0, -3.0}), -2.0);
  EXPECT_THROW(eki::least_squares_slope({1.0}, {1.0}), eki::InvalidArgument);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(37);
  eki::parallel_for(37, 5, [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(eki::parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 6) throw eki::NumericalFailure("boom");
                                 }),
               eki::NumericalFailure);
}

TEST(ExperimentSpec, ValidationCatchesBadLists) {
  auto spec = eki::preset(eki::Study::kContraction);
  spec.n_list = {100, 100};
  EXPECT_THROW(spec.validate(), eki::InvalidArgument);
  spec.n_list = {};
  EXPECT_THROW(spec.validate(), eki::InvalidArgument);
  spec = eki::preset(eki::Study::kContraction);
  spec.replicates = 0;
  EXPECT_THROW(spec.validate(), eki::InvalidArgument);
}

TEST(ContractionStudy, OutputIndependentOfThreadCount) {
  auto spec = small_spec(eki::Study::kContraction);
  spec.output_dir = scratch("contraction_1");
  spec.jobs = 1;
  const auto a = eki::run_contraction_study(spec);
  spec.output_dir = scratch("contraction_4");
  spec.jobs = 4;
  const auto b = eki::run_contraction_study(spec);
  EXPECT_EQ(slurp(scratch("x").parent_path() / "eki_test_contraction_1" / "contraction.csv"),
            slurp(spec.output_dir / "contraction.csv"));
  EXPECT_EQ(a.fitted_slope, b.fitted_slope);
  ASSERT_EQ(a.rows.size(), 6u);
  const std::string csv = slurp(spec.output_dir / "contraction.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,D,replicate,k_dp,tau_dp,err_v,truncation_err,err_f,hit_cap,diverged");
  EXPECT_NE(slurp(spec.output_dir / "summary.txt").find("fitted_slope: "), std::string::npos);
  for (const auto& r : a.rows) {
    EXPECT_FALSE(r.diverged);
    EXPECT_GT(r.err_v, 0.0);
    EXPECT_GT(r.truncation_err, 0.0);
  }
}

TEST(CoverageStudy, RowsAndFractions) {
  auto spec = small_spec(eki::Study::kCoverage);
  spec.write_files = false;
  const auto res = eki::run_coverage_study(spec);
  ASSERT_EQ(res.rows.size(), 6u);
  ASSERT_EQ(res.fraction_v.size(), 2u);
  for (double f : res.fraction_v) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
  for (const auto& r : res.rows) EXPECT_GT(r.band_width, 0.0);
}

TEST(Figure1, WritesCsvAndSvgPanels) {
  auto spec = eki::preset(eki::Study::kFigure1);
  spec.n_list = {100, 1000};
  spec.model.particles = 64;
  spec.model.k_max = 500;
  spec.output_dir = scratch("figure1");
  const auto res = eki::run_figure1(spec);
  ASSERT_EQ(res.panels.size(), 2u);
  for (const auto& p : res.panels) {
    ASSERT_EQ(p.files.size(), 4u);
    for (const auto& f : p.files) EXPECT_TRUE(fs::exists(f)) << f;
    EXPECT_GT(p.band_area_f, 0.0);
  }
  const std::string svg = slurp(spec.output_dir / "figure1_function_n100.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("class=\"band\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"mean\""), std::string::npos);
  EXPECT_NE(svg.find("class=\"truth\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const std::string csv = slurp(spec.output_dir / "figure1_coeffs_n1000.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,truth,mean,lo,hi");
}

TEST(OracleCheck, FilterMatchesClosedFormPosterior) {
  auto spec = eki::preset(eki::Study::kOracle);
  spec.write_files = false;
  const auto rep = eki::run_oracle_check(spec);
  EXPECT_EQ(rep.steps, 1000u);
  EXPECT_LE(rep.mean_rel_error, eki::OracleReport::kMeanTolerance);
  EXPECT_LE(rep.max_var_rel_error, eki::OracleReport::kVarTolerance);
  EXPECT_TRUE(rep.passed);
}

TEST(RoundTripSuite, TwoLevels) {
  const auto rep = eki::run_round_trip_suite(eki::default_round_trip_instance(), {}, 1024, 64, 2);
  ASSERT_EQ(rep.levels.size(), 2u);
  ASSERT_EQ(rep.slopes.size(), 1u);
  EXPECT_NEAR(rep.slopes[0], -2.0, 0.3);
  EXPECT_EQ(eki::round_trip_table(rep).str().substr(0, 10), "m,D,h,erro");
}

}  // namespace
