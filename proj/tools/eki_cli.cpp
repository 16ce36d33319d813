// Command-line front end for the early-stopped ensemble Kalman inversion
// studies. Exit codes: 0 success, 1 tolerance breach, 2 invalid configuration.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eki/config.hpp"
#include "eki/experiments.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<std::string> n;
  std::optional<std::string> n_list;
  std::optional<std::string> dim;
  std::optional<double> alpha;
  std::optional<double> dt;
  std::optional<std::size_t> particles;
  std::optional<double> kappa_const;
  std::optional<std::size_t> replicates;
  std::optional<double> tau;
  std::optional<std::size_t> k_max;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value configuration file");
  cmd->add_option("--seed", o.seed, "root random seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--jobs", o.jobs, "worker threads for replicates");
  cmd->add_option("--n", o.n, "single sample size (replaces n_list)");
  cmd->add_option("--n-list", o.n_list, "comma-separated ascending sample sizes");
  cmd->add_option("--dim", o.dim, "projection dimension D, or 'auto' for D(n)");
  cmd->add_option("--alpha", o.alpha, "prior smoothness");
  cmd->add_option("--dt", o.dt, "filter time step");
  cmd->add_option("--particles", o.particles, "ensemble size J");
  cmd->add_option("--kappa-const", o.kappa_const, "C in kappa = C D / n");
  cmd->add_option("--replicates", o.replicates, "replicates per sample size");
  cmd->add_option("--tau", o.tau, "homotopy time for the oracle study");
  cmd->add_option("--k-max", o.k_max, "iteration cap");
}

eki::ExperimentSpec resolve(eki::Study study, const Overrides& o) {
  eki::ExperimentSpec spec = eki::preset(study);
  if (!o.config.empty()) eki::apply_config(eki::read_config_file(o.config), spec);
  eki::ConfigMap flags;
  auto num = [](double x) { return eki::format_number(x); };
  if (o.seed) flags["seed"] = std::to_string(*o.seed);
  if (o.out) flags["out"] = *o.out;
  if (o.jobs) flags["jobs"] = std::to_string(*o.jobs);
  if (o.n) flags["n"] = *o.n;
  if (o.n_list) flags["n_list"] = *o.n_list;
  if (o.dim) flags["dim"] = *o.dim;
  if (o.alpha) flags["alpha"] = num(*o.alpha);
  if (o.dt) flags["dt"] = num(*o.dt);
  if (o.particles) flags["particles"] = std::to_string(*o.particles);
  if (o.kappa_const) flags["kappa_constant"] = num(*o.kappa_const);
  if (o.replicates) flags["replicates"] = std::to_string(*o.replicates);
  if (o.tau) flags["tau"] = num(*o.tau);
  if (o.k_max) flags["k_max"] = std::to_string(*o.k_max);
  eki::apply_config(flags, spec);
  spec.validate();
  return spec;
}

int run_study(eki::Study study, const Overrides& o) {
  const eki::ExperimentSpec spec = resolve(study, o);
  eki::CsvTable::write_text(spec.output_dir / "resolved_config.txt", eki::resolved_config_text(spec));

  switch (study) {
    case eki::Study::kContraction: {
      const auto res = eki::run_contraction_study(spec);
      for (std::size_t i = 0; i < res.n_values.size(); ++i)
        std::cout << "n=" << res.n_values[i] << "  median err_v=" << eki::format_number(res.median_err_v[i])
                  << "  median err_f=" << eki::format_number(res.median_err_f[i]) << "\n";
      std::cout << "fitted slope " << eki::format_number(res.fitted_slope) << "  theoretical "
                << eki::format_number(-res.theoretical_exponent) << "\n";
      if (res.diverged) std::cout << res.diverged << " replicate(s) diverged and were excluded\n";
      return 0;
    }
    case eki::Study::kCoverage: {
      const auto res = eki::run_coverage_study(spec);
      for (std::size_t i = 0; i < res.n_values.size(); ++i)
        std::cout << "n=" << res.n_values[i] << "  coverage v=" << eki::format_number(res.fraction_v[i])
                  << "  f=" << eki::format_number(res.fraction_f[i])
                  << "  ball=" << eki::format_number(res.fraction_ball[i]) << "\n";
      return 0;
    }
    case eki::Study::kFigure1: {
      const auto res = eki::run_figure1(spec);
      for (const auto& p : res.panels)
        std::cout << "n=" << p.n << "  k_dp=" << p.k_dp << "  band area f=" << eki::format_number(p.band_area_f)
                  << "  truth inside " << p.truth_inside_f << "/" << p.grid_points << "\n";
      return 0;
    }
    case eki::Study::kOracle: {
      const auto rep = eki::run_oracle_check(spec);
      std::cout << "tau=" << eki::format_number(rep.tau) << " (" << rep.steps << " steps)\n";
      std::cout << "mean rel error " << eki::format_number(rep.mean_rel_error) << " (tol "
                << eki::format_number(eki::OracleReport::kMeanTolerance) << ")\n";
      std::cout << "i  posterior_var  ensemble_var  rel_err\n";
      for (std::size_t i = 0; i < rep.var_rel_error.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        std::cout << i + 1 << "  " << eki::format_number(rep.posterior_var[k]) << "  "
                  << eki::format_number(rep.ensemble_var[k]) << "  " << eki::format_number(rep.var_rel_error[i]) << "\n";
      }
      std::cout << (rep.passed ? "PASS" : "FAIL") << "\n";
      return rep.passed ? 0 : 1;
    }
    case eki::Study::kRoundTrip: {
      const auto rep = eki::run_round_trip_suite(eki::default_round_trip_instance(), spec.pullback);
      eki::round_trip_table(rep).write(spec.output_dir / "roundtrip.csv");
      for (const auto& l : rep.levels)
        std::cout << "m=" << l.m << "  D=" << l.dim << "  error=" << eki::format_number(l.error) << "\n";
      std::cout << "mean slope " << eki::format_number(rep.mean_slope) << "\n";
      std::cout << (rep.passed ? "PASS" : "FAIL") << "\n";
      return rep.passed ? 0 : 1;
    }
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early-stopped ensemble Kalman inversion for the 1-D Schroedinger problem"};
  app.require_subcommand(1);

  struct Entry {
    eki::Study study;
    const char* help;
    CLI::App* cmd = nullptr;
    Overrides overrides;
  };
  Entry entries[] = {
      {eki::Study::kOracle, "compare the filter with the closed-form tempered posterior", nullptr, {}},
      {eki::Study::kContraction, "posterior contraction study over n_list", nullptr, {}},
      {eki::Study::kCoverage, "frequentist coverage study of the quantile bands", nullptr, {}},
      {eki::Study::kFigure1, "coefficient and potential panels with credible bands", nullptr, {}},
      {eki::Study::kRoundTrip, "finite-difference round trip of the pull-back map", nullptr, {}},
  };
  for (auto& e : entries) {
    e.cmd = app.add_subcommand(eki::study_name(e.study), e.help);
    add_common_options(e.cmd, e.overrides);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& e : entries)
      if (e.cmd->parsed()) return run_study(e.study, e.overrides);
  } catch (const eki::InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
