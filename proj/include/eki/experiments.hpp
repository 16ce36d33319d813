#pragma once

// Seeded replicate orchestration for the contraction, coverage, figure and
// oracle studies. Every replicate owns its random streams, ensemble and output
// row; files are written by the orchestrator after all replicates finish, so
// results do not depend on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eki/enkbf.hpp"
#include "eki/error.hpp"
#include "eki/io.hpp"
#include "eki/posterior.hpp"
#include "eki/schrodinger.hpp"
#include "eki/seq_model.hpp"
#include "eki/spectral.hpp"
#include "eki/svg.hpp"

namespace eki {

enum class Study { kContraction, kCoverage, kFigure1, kOracle, kRoundTrip };

inline std::string study_name(Study s) {
  switch (s) {
    case Study::kContraction: return "contraction";
    case Study::kCoverage: return "coverage";
    case Study::kFigure1: return "figure1";
    case Study::kOracle: return "oracle";
    case Study::kRoundTrip: return "roundtrip";
  }
  return "unknown";
}

struct ExperimentSpec {
  ModelConfig model;
  std::vector<std::size_t> n_list{1000, 10000, 100000};
  std::size_t replicates = 20;
  Study study = Study::kContraction;
  std::filesystem::path output_dir = "out";
  std::size_t jobs = 1;
  std::size_t grid_points = 100;  // pull-back grid
  std::size_t truth_dim = 100;    // length of v0 used for f0 and truncation error
  std::size_t coverage_coeffs = 10;
  double oracle_tau = 1.0;
  PullbackConfig pullback;
  bool write_files = true;

  void validate() const {
    model.validate();
    detail::require(replicates >= 1, "replicates must be at least 1");
    detail::require(!n_list.empty(), "n_list must not be empty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      detail::require(n_list[i] >= 1, "n_list entries must be positive");
      detail::require(i == 0 || n_list[i] > n_list[i - 1], "n_list must be strictly ascending");
    }
    detail::require(jobs >= 1, "jobs must be at least 1");
    detail::require(grid_points >= 2, "grid_points must be at least 2");
    detail::require(truth_dim >= 1, "truth_dim must be positive");
    detail::require(coverage_coeffs >= 1, "coverage_coeffs must be positive");
    detail::require(oracle_tau >= 0.0, "tau must be non-negative");
  }
};

/// Study presets; config files and flags are applied on top.
inline ExperimentSpec preset(Study study) {
  ExperimentSpec s;
  s.study = study;
  switch (study) {
    case Study::kContraction:
      s.n_list = {1000, 10000, 100000, 1000000};
      s.replicates = 20;
      break;
    case Study::kCoverage:
      s.n_list = {1000, 10000, 100000};
      s.replicates = 50;
      break;
    case Study::kFigure1:
      s.n_list = {100, 1000, 10000};
      s.replicates = 1;
      s.model.dim_override = 100;
      break;
    case Study::kOracle:
      s.n_list = {10000};
      s.replicates = 1;
      s.model.n = 10000;
      s.model.dim_override = 10;
      s.model.particles = 2048;
      s.model.dt = 1e-3;
      break;
    case Study::kRoundTrip:
      s.replicates = 1;
      break;
  }
  return s;
}

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

inline double median(std::vector<double> xs) {
  detail::require(!xs.empty(), "median: empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

/// Least-squares slope of y against x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "least_squares_slope: need two or more points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// Everything one seeded filter run produces.
struct ReplicateOutcome {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t replicate = 0;
  bool diverged = false;
  std::string failure;
  SpectralBasis basis{1};
  SeqVector truth;  // length truth_dim
  ObservationSet obs;
  FilterRun run;
  double kappa = 0.0;
};

/// Generates data for (n, replicate), runs the filter to the discrepancy time.
inline ReplicateOutcome run_replicate(const ExperimentSpec& spec, std::size_t slot, std::size_t replicate) {
  const ModelConfig& cfg = spec.model;
  ReplicateOutcome out;
  out.n = spec.n_list.at(slot);
  out.dim = model_dimension(cfg, out.n);
  out.replicate = replicate;
  const std::size_t full = std::max(out.dim, spec.truth_dim);
  out.basis = eigenpairs(full);
  out.truth = ground_truth(full, cfg.truth_decay);
  out.obs = generate_observations(out.basis, out.truth, out.n, out.dim, cfg.seed, replicate, slot, cfg.noise_free);
  out.kappa = discrepancy_threshold(cfg, out.dim, out.n);
  Ensemble ens = init_ensemble(cfg.particles, cfg.prior(out.dim), cfg.seed, cfg.dt, replicate, slot);
  try {
    out.run = run_until_discrepancy(out.basis, std::move(ens), out.obs, out.kappa, cfg.k0, cfg.k_max);
  } catch (const DivergenceError& e) {
    out.diverged = true;
    out.failure = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// contraction

struct ContractionRow {
  std::size_t n = 0, dim = 0, replicate = 0, k_dp = 0;
  double tau_dp = 0.0;
  double err_v = 0.0;           // l2 over the first D coefficients
  double truncation_err = 0.0;  // l2 norm of v0 beyond D
  double err_f = 0.0;           // grid L2
  bool hit_cap = false;
  bool diverged = false;
};

struct ContractionResult {
  std::vector<ContractionRow> rows;
  std::vector<std::size_t> n_values;
  std::vector<double> median_err_v;
  std::vector<double> median_err_f;
  double fitted_slope = 0.0;
  double fitted_slope_f = 0.0;
  double theoretical_exponent = 0.0;  // rate is n^{-exponent}
  std::size_t diverged = 0;
  std::size_t capped = 0;
};

/// Regularity beta of v0_i = i^{-decay}: sum i^{2b} v_i^2 < inf iff b < decay - 1/2.
inline double truth_regularity(double decay) { return decay - 0.5; }

inline CsvTable contraction_table(const std::vector<ContractionRow>& rows) {
  CsvTable t({"n", "D", "replicate", "k_dp", "tau_dp", "err_v", "truncation_err", "err_f", "hit_cap", "diverged"});
  for (const auto& r : rows)
    t.add_row({r.n, r.dim, r.replicate, r.k_dp, r.tau_dp, r.err_v, r.truncation_err, r.err_f, r.hit_cap,
               r.diverged});
  return t;
}

/// Medians per n and the log-log slope over non-diverged rows.
inline void summarise_contraction(ContractionResult& res) {
  res.median_err_v.clear();
  res.median_err_f.clear();
  std::vector<double> lx, ly, lyf;
  for (std::size_t n : res.n_values) {
    std::vector<double> ev, ef;
    for (const auto& r : res.rows)
      if (r.n == n && !r.diverged) {
        ev.push_back(r.err_v);
        ef.push_back(r.err_f);
      }
    if (ev.empty()) {
      res.median_err_v.push_back(NAN);
      res.median_err_f.push_back(NAN);
      continue;
    }
    res.median_err_v.push_back(median(ev));
    res.median_err_f.push_back(median(ef));
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(res.median_err_v.back()));
    lyf.push_back(std::log(res.median_err_f.back()));
  }
  res.fitted_slope = lx.size() >= 2 ? least_squares_slope(lx, ly) : NAN;
  res.fitted_slope_f = lx.size() >= 2 ? least_squares_slope(lx, lyf) : NAN;
}

inline ContractionResult run_contraction_study(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t tasks = spec.n_list.size() * spec.replicates;
  std::vector<ContractionRow> rows(tasks);
  const Grid grid(spec.grid_points);

  parallel_for(tasks, spec.jobs, [&](std::size_t t) {
    const std::size_t slot = t / spec.replicates, rep = t % spec.replicates;
    const ReplicateOutcome o = run_replicate(spec, slot, rep);
    ContractionRow& row = rows[t];
    row.n = o.n;
    row.dim = o.dim;
    row.replicate = rep;
    row.diverged = o.diverged;
    row.truncation_err = o.truth.tail(o.truth.size() - static_cast<Eigen::Index>(o.dim)).norm();
    if (o.diverged) {
      row.err_v = row.err_f = NAN;
      return;
    }
    const SeqVector m = o.run.ensemble.mean();
    row.k_dp = o.run.report.k_dp;
    row.tau_dp = o.run.report.tau_dp;
    row.hit_cap = o.run.report.hit_cap;
    row.err_v = (m - o.obs.truth).norm();
    const GridFunction lift = zero_function(grid);
    const GridFunction f_hat = solution_map_e(o.basis, m, lift, grid, spec.pullback);
    const GridFunction f_0 = solution_map_e(o.basis, o.truth, lift, grid, spec.pullback);
    row.err_f = GridFunction(grid, f_hat.values - f_0.values).l2_norm();
  });

  ContractionResult res;
  res.rows = std::move(rows);
  res.n_values = spec.n_list;
  for (const auto& r : res.rows) {
    res.diverged += r.diverged ? 1 : 0;
    res.capped += r.hit_cap ? 1 : 0;
  }
  summarise_contraction(res);
  res.theoretical_exponent = theoretical_rate(truth_regularity(spec.model.truth_decay), spec.model.p, spec.model.alpha);

  if (spec.write_files) {
    contraction_table(res.rows).write(spec.output_dir / "contraction.csv");
    KeyValueReport rep;
    rep.add("study", "contraction");
    for (std::size_t i = 0; i < res.n_values.size(); ++i) {
      rep.add("median_err_v_n" + std::to_string(res.n_values[i]), res.median_err_v[i]);
      rep.add("median_err_f_n" + std::to_string(res.n_values[i]), res.median_err_f[i]);
    }
    rep.add("fitted_slope", res.fitted_slope);
    rep.add("fitted_slope_f", res.fitted_slope_f);
    rep.add("theoretical_slope", -res.theoretical_exponent);
    rep.add("rate_regime_valid",
            rate_regime_valid(truth_regularity(spec.model.truth_decay), spec.model.p, spec.model.alpha));
    rep.add("diverged", res.diverged);
    rep.add("hit_cap", res.capped);
    rep.write(spec.output_dir / "summary.txt");
  }
  return res;
}

// ---------------------------------------------------------------------------
// coverage

struct CoverageRow {
  std::size_t n = 0, dim = 0, replicate = 0, k_dp = 0;
  double tau_dp = 0.0;
  bool covered_v = false;
  bool covered_f = false;
  double band_width = 0.0;   // summed width of the coefficient band
  double ball_radius = 0.0;  // level-quantile of |v_j - m|
  bool covered_ball = false;
  bool hit_cap = false;
  bool diverged = false;
};

struct CoverageResult {
  std::vector<CoverageRow> rows;
  std::vector<std::size_t> n_values;
  std::vector<double> fraction_v;
  std::vector<double> fraction_f;
  std::vector<double> fraction_ball;
  std::size_t diverged = 0;
};

/// Pulls every particle back to the grid; returns a grid x J matrix.
inline Eigen::MatrixXd pulled_back_particles(const SpectralBasis& basis, const Ensemble& ens, const Grid& grid,
                                             const PullbackConfig& cfg) {
  const GridFunction lift = zero_function(grid);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), ens.particles.cols());
  for (Eigen::Index j = 0; j < ens.particles.cols(); ++j)
    out.col(j) = pullback(basis, ens.particles.col(j), lift, cfg).f.values;
  return out;
}

inline CsvTable coverage_table(const std::vector<CoverageRow>& rows) {
  CsvTable t({"n", "D", "replicate", "k_dp", "tau_dp", "covered_v", "covered_f", "band_width", "ball_radius",
              "covered_ball", "hit_cap", "diverged"});
  for (const auto& r : rows)
    t.add_row({r.n, r.dim, r.replicate, r.k_dp, r.tau_dp, r.covered_v, r.covered_f, r.band_width, r.ball_radius,
               r.covered_ball, r.hit_cap, r.diverged});
  return t;
}

inline CoverageResult run_coverage_study(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t tasks = spec.n_list.size() * spec.replicates;
  std::vector<CoverageRow> rows(tasks);
  const Grid grid(spec.grid_points);
  const double level = spec.model.quantile_level;

  parallel_for(tasks, spec.jobs, [&](std::size_t t) {
    const std::size_t slot = t / spec.replicates, rep = t % spec.replicates;
    const ReplicateOutcome o = run_replicate(spec, slot, rep);
    CoverageRow& row = rows[t];
    row.n = o.n;
    row.dim = o.dim;
    row.replicate = rep;
    row.diverged = o.diverged;
    if (o.diverged) return;
    row.k_dp = o.run.report.k_dp;
    row.tau_dp = o.run.report.tau_dp;
    row.hit_cap = o.run.report.hit_cap;

    const Ensemble& ens = o.run.ensemble;
    const auto k = static_cast<Eigen::Index>(std::min(o.dim, spec.coverage_coeffs));
    const QuantileBand band = quantile_band(ens.particles.topRows(k), level);
    row.covered_v = true;
    for (Eigen::Index i = 0; i < k; ++i) row.covered_v = row.covered_v && band.contains(i, o.obs.truth[i]);
    row.band_width = band.width().sum();

    const SeqVector m = ens.mean();
    std::vector<double> dist(ens.size());
    for (std::size_t j = 0; j < ens.size(); ++j)
      dist[j] = (ens.particles.col(static_cast<Eigen::Index>(j)) - m).norm();
    row.ball_radius = empirical_quantile(dist, level);
    row.covered_ball = (o.obs.truth - m).norm() <= row.ball_radius;

    const QuantileBand fband = quantile_band(pulled_back_particles(o.basis, ens, grid, spec.pullback), level);
    const GridFunction f0 = solution_map_e(o.basis, o.truth, zero_function(grid), grid, spec.pullback);
    row.covered_f = true;
    for (Eigen::Index j = 0; j < f0.values.size(); ++j) row.covered_f = row.covered_f && fband.contains(j, f0.values[j]);
  });

  CoverageResult res;
  res.rows = std::move(rows);
  res.n_values = spec.n_list;
  for (std::size_t n : res.n_values) {
    double cv = 0, cf = 0, cb = 0, total = 0;
    for (const auto& r : res.rows) {
      if (r.n != n || r.diverged) continue;
      total += 1;
      cv += r.covered_v;
      cf += r.covered_f;
      cb += r.covered_ball;
    }
    res.fraction_v.push_back(total > 0 ? cv / total : NAN);
    res.fraction_f.push_back(total > 0 ? cf / total : NAN);
    res.fraction_ball.push_back(total > 0 ? cb / total : NAN);
  }
  for (const auto& r : res.rows) res.diverged += r.diverged ? 1 : 0;

  if (spec.write_files) {
    coverage_table(res.rows).write(spec.output_dir / "coverage.csv");
    KeyValueReport rep;
    rep.add("study", "coverage");
    rep.add("level", level);
    for (std::size_t i = 0; i < res.n_values.size(); ++i) {
      const std::string n = std::to_string(res.n_values[i]);
      rep.add("coverage_v_n" + n, res.fraction_v[i]);
      rep.add("coverage_f_n" + n, res.fraction_f[i]);
      rep.add("coverage_ball_n" + n, res.fraction_ball[i]);
    }
    rep.add("diverged", res.diverged);
    rep.write(spec.output_dir / "summary.txt");
  }
  return res;
}

// ---------------------------------------------------------------------------
// figure1

struct FigurePanel {
  std::size_t n = 0;
  std::size_t k_dp = 0;
  bool hit_cap = false;
  double band_area_f = 0.0;  // integral of the f band width over the grid
  double band_area_v = 0.0;  // summed width of the coefficient band
  std::size_t truth_inside_f = 0;
  std::size_t grid_points = 0;
  std::vector<std::filesystem::path> files;
};

struct Figure1Result {
  std::vector<FigurePanel> panels;
};

inline Figure1Result run_figure1(const ExperimentSpec& spec) {
  spec.validate();
  const Grid grid(spec.grid_points);
  const double level = spec.model.quantile_level;
  std::vector<FigurePanel> panels(spec.n_list.size());
  std::vector<std::vector<std::pair<std::filesystem::path, std::string>>> outputs(spec.n_list.size());

  parallel_for(spec.n_list.size(), spec.jobs, [&](std::size_t slot) {
    const ReplicateOutcome o = run_replicate(spec, slot, 0);
    if (o.diverged) throw DivergenceError(o.failure);
    const Ensemble& ens = o.run.ensemble;
    FigurePanel& panel = panels[slot];
    panel.n = o.n;
    panel.k_dp = o.run.report.k_dp;
    panel.hit_cap = o.run.report.hit_cap;
    panel.grid_points = grid.size();
    const std::string tag = "n" + std::to_string(o.n);
    const SeqVector m = ens.mean();

    // coefficients
    const auto k = static_cast<Eigen::Index>(std::min(o.dim, spec.coverage_coeffs));
    const QuantileBand band = quantile_band(ens.particles.topRows(k), level);
    panel.band_area_v = band.width().sum();
    CsvTable coeffs({"i", "truth", "mean", "lo", "hi"});
    Eigen::VectorXd idx(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      idx[i] = static_cast<double>(i + 1);
      coeffs.add_row({static_cast<long>(i + 1), o.truth[i], m[i], band.lo[i], band.hi[i]});
    }
    SvgPlot cplot("coefficients, n = " + std::to_string(o.n), "i", "v_i");
    cplot.band(idx, band.lo, band.hi);
    const Eigen::Index shown = std::min<Eigen::Index>(ens.particles.cols(), 30);
    for (Eigen::Index j = 0; j < shown; ++j)
      cplot.line(idx, ens.particles.col(j).head(k), {"#3d85c6", 0.6, "2,2", 0.6}, "particle");
    cplot.line(idx, m.head(k), {"#cc0000", 2.0, "", 1.0}, "mean");
    cplot.line(idx, o.truth.head(k), {"black", 1.5, "6,4", 1.0}, "truth");

    // pulled-back potential
    const GridFunction lift = zero_function(grid);
    const Eigen::MatrixXd fparticles = pulled_back_particles(o.basis, ens, grid, spec.pullback);
    const QuantileBand fband = quantile_band(fparticles, level);
    const GridFunction f_hat = solution_map_e(o.basis, m, lift, grid, spec.pullback);
    const GridFunction f_0 = solution_map_e(o.basis, o.truth, lift, grid, spec.pullback);
    panel.band_area_f = grid.spacing() * fband.width().sum();
    CsvTable fn({"x", "truth", "mean", "lo", "hi"});
    for (Eigen::Index j = 0; j < f_0.values.size(); ++j) {
      panel.truth_inside_f += fband.contains(j, f_0.values[j]) ? 1 : 0;
      fn.add_row({grid.points()[j], f_0.values[j], f_hat.values[j], fband.lo[j], fband.hi[j]});
    }
    SvgPlot fplot("potential, n = " + std::to_string(o.n), "x", "f(x)");
    fplot.band(grid.points(), fband.lo, fband.hi);
    for (Eigen::Index j = 0; j < shown; ++j)
      fplot.line(grid.points(), fparticles.col(j), {"#3d85c6", 0.6, "2,2", 0.6}, "particle");
    fplot.line(grid.points(), f_hat.values, {"#cc0000", 2.0, "", 1.0}, "mean");
    fplot.line(grid.points(), f_0.values, {"black", 1.5, "6,4", 1.0}, "truth");

    auto& files = outputs[slot];
    files.emplace_back("figure1_coeffs_" + tag + ".csv", coeffs.str());
    files.emplace_back("figure1_function_" + tag + ".csv", fn.str());
    files.emplace_back("figure1_coeffs_" + tag + ".svg", cplot.str());
    files.emplace_back("figure1_function_" + tag + ".svg", fplot.str());
  });

  Figure1Result res;
  for (std::size_t s = 0; s < panels.size(); ++s) {
    for (const auto& [name, text] : outputs[s]) {
      panels[s].files.push_back(spec.output_dir / name);
      if (spec.write_files) CsvTable::write_text(spec.output_dir / name, text);
    }
  }
  res.panels = std::move(panels);
  if (spec.write_files) {
    KeyValueReport rep;
    rep.add("study", "figure1");
    for (const auto& p : res.panels) {
      const std::string n = std::to_string(p.n);
      rep.add("k_dp_n" + n, p.k_dp);
      rep.add("hit_cap_n" + n, p.hit_cap);
      rep.add("band_area_f_n" + n, p.band_area_f);
      rep.add("band_area_v_n" + n, p.band_area_v);
      rep.add("truth_inside_f_n" + n, p.truth_inside_f);
    }
    rep.write(spec.output_dir / "summary.txt");
  }
  return res;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleReport {
  double tau = 0.0;
  std::size_t steps = 0;
  double mean_rel_error = 0.0;
  std::vector<double> var_rel_error;  // first min(D, 5) coordinates
  double max_var_rel_error = 0.0;
  SeqVector ensemble_mean, posterior_mean;
  Eigen::VectorXd ensemble_var, posterior_var;
  bool passed = false;

  static constexpr double kMeanTolerance = 0.05;
  static constexpr double kVarTolerance = 0.20;
};

/// Runs round(tau/dt) steps without stopping and compares with the
/// closed-form tempered posterior at tau.
inline OracleReport run_oracle_check(const ExperimentSpec& spec) {
  spec.validate();
  const ModelConfig& cfg = spec.model;
  const std::size_t n = spec.n_list.front();
  const std::size_t dim = model_dimension(cfg, n);
  const std::size_t full = std::max(dim, spec.truth_dim);
  const SpectralBasis basis = eigenpairs(full);
  const SeqVector truth = ground_truth(full, cfg.truth_decay);
  const ObservationSet obs = generate_observations(basis, truth, n, dim, cfg.seed, 0, 0, cfg.noise_free);
  const PriorSpec prior = cfg.prior(dim);

  OracleReport rep;
  rep.steps = static_cast<std::size_t>(std::llround(spec.oracle_tau / cfg.dt));
  rep.tau = static_cast<double>(rep.steps) * cfg.dt;
  Ensemble ens = init_ensemble(cfg.particles, prior, cfg.seed, cfg.dt, 0, 0);
  std::vector<double> path{residual(basis, obs, ens.mean())};
  for (std::size_t s = 0; s < rep.steps; ++s) {
    advance(basis, ens, obs);
    path.push_back(residual(basis, obs, ens.mean()));
  }

  const GaussianPosterior post = posterior_moments(basis, prior, obs, rep.tau);
  const EmpiricalMoments mom = empirical_moments(basis, ens);
  rep.ensemble_mean = mom.mean;
  rep.posterior_mean = post.mean;
  rep.ensemble_var = mom.cov.diagonal();
  rep.posterior_var = post.variance;
  const double ref = post.mean.norm();
  rep.mean_rel_error = ref > 0.0 ? (mom.mean - post.mean).norm() / ref : (mom.mean - post.mean).norm();
  const auto checked = std::min<Eigen::Index>(static_cast<Eigen::Index>(dim), 5);
  for (Eigen::Index i = 0; i < checked; ++i)
    rep.var_rel_error.push_back(std::abs(rep.ensemble_var[i] - post.variance[i]) / post.variance[i]);
  rep.max_var_rel_error = *std::max_element(rep.var_rel_error.begin(), rep.var_rel_error.end());
  rep.passed = rep.mean_rel_error <= OracleReport::kMeanTolerance && rep.max_var_rel_error <= OracleReport::kVarTolerance;

  if (spec.write_files) {
    CsvTable t({"i", "posterior_mean", "ensemble_mean", "posterior_var", "ensemble_var"});
    for (Eigen::Index i = 0; i < post.mean.size(); ++i)
      t.add_row({static_cast<long>(i + 1), post.mean[i], mom.mean[i], post.variance[i], rep.ensemble_var[i]});
    t.write(spec.output_dir / "oracle.csv");
    StopReport sr;
    sr.k_dp = rep.steps;
    sr.tau_dp = rep.tau;
    sr.residual_path = path;
    residual_path_table(sr, cfg.dt).write(spec.output_dir / "oracle_residuals.csv");
    KeyValueReport kv;
    kv.add("study", "oracle");
    kv.add("tau", rep.tau);
    kv.add("steps", rep.steps);
    kv.add("mean_rel_error", rep.mean_rel_error);
    kv.add("max_var_rel_error", rep.max_var_rel_error);
    kv.add("mean_tolerance", OracleReport::kMeanTolerance);
    kv.add("var_tolerance", OracleReport::kVarTolerance);
    kv.add("passed", rep.passed);
    kv.write(spec.output_dir / "summary.txt");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// round trip

struct RoundTripLevel {
  std::size_t m = 0, dim = 0;
  double h = 0.0;
  double error = 0.0;
};

struct RoundTripReport {
  std::vector<RoundTripLevel> levels;
  std::vector<double> slopes;  // successive log-log slopes of error vs m
  double mean_slope = 0.0;
  bool passed = false;

  static constexpr double kErrorTolerance = 1e-2;
  static constexpr double kSlope = -2.0;
  static constexpr double kSlopeTolerance = 0.3;
};

/// f(x) = sin^2(x/2) with u(0) = 1, u(2*pi) = 2.
inline PDEInstance default_round_trip_instance() {
  return PDEInstance{[](double x) { return std::pow(std::sin(0.5 * x), 2); }, 1.0, 2.0, true};
}

/// Refines (m, D) together from (m0, D0) by factors of two, `levels` times.
inline RoundTripReport run_round_trip_suite(const PDEInstance& inst, const PullbackConfig& cfg,
                                            std::size_t m0 = 1024, std::size_t d0 = 64, std::size_t levels = 4) {
  detail::require(levels >= 2, "run_round_trip_suite: need at least two levels");
  RoundTripReport rep;
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t m = m0 << l, d = d0 << l;
    const SpectralBasis basis = eigenpairs(d);
    rep.levels.push_back({m, d, Grid(m).spacing(), round_trip_error(inst, m, basis, d, cfg)});
  }
  for (std::size_t l = 1; l < rep.levels.size(); ++l)
    rep.slopes.push_back(std::log(rep.levels[l].error / rep.levels[l - 1].error) /
                         std::log(static_cast<double>(rep.levels[l].m) / static_cast<double>(rep.levels[l - 1].m)));
  rep.mean_slope = std::accumulate(rep.slopes.begin(), rep.slopes.end(), 0.0) / static_cast<double>(rep.slopes.size());
  bool slopes_ok = true;
  for (double s : rep.slopes) slopes_ok = slopes_ok && std::abs(s - RoundTripReport::kSlope) <= RoundTripReport::kSlopeTolerance;
  rep.passed = rep.levels.front().error <= RoundTripReport::kErrorTolerance && slopes_ok;
  return rep;
}

inline CsvTable round_trip_table(const RoundTripReport& rep) {
  CsvTable t({"m", "D", "h", "error"});
  for (const auto& l : rep.levels) t.add_row({l.m, l.dim, l.h, l.error});
  return t;
}

}  // namespace eki
