#include "cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "cli/config_io.hpp"
#include "cli/output.hpp"
#include "cli/verify.hpp"
#include "gaplab/anticoncentration.hpp"
#include "gaplab/experiments.hpp"
#include "gaplab/lattice.hpp"

#ifndef GAPLAB_VERSION
#define GAPLAB_VERSION "0.0.0"
#endif

namespace gaplab::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::size_t> n;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> alpha;
  std::optional<double> eta;
  std::optional<double> nu;
  std::optional<double> beta;
  std::optional<std::string> dist;
  std::optional<double> q;
  std::optional<std::string> perturbation;
  std::optional<double> scale;
  std::optional<std::string> perturbation_file;
  std::optional<std::string> rho_mode;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> lambda_grid_cap;
  std::vector<double> thresholds;
  std::optional<std::string> method;
};

void apply(const Overrides& o, RunConfig& cfg) {
  ExperimentConfig& e = cfg.experiment;
  if (o.n) e.n = *o.n;
  if (o.trials) e.trials = *o.trials;
  if (o.seed) e.master_seed = *o.seed;
  if (o.threads) e.threads = *o.threads;
  if (o.alpha) e.alpha = *o.alpha;
  if (o.eta) e.eta = *o.eta;
  if (o.nu) e.nu = *o.nu;
  if (o.beta) e.beta_override = *o.beta;
  if (o.dist) {
    try {
      e.dist.kind = parse_distribution_kind(*o.dist);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'dist.kind': ") + err.what());
    }
  }
  if (o.q) e.dist.lazy_probability = *o.q;
  if (o.perturbation) {
    try {
      e.perturbation.kind = parse_perturbation_kind(*o.perturbation);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(std::string("config key 'perturbation.kind': ") + err.what());
    }
  }
  if (o.scale) e.perturbation.scale = *o.scale;
  if (o.perturbation_file) e.perturbation.file = *o.perturbation_file;
  if (o.rho_mode) {
    if (*o.rho_mode == "exact") {
      e.rho_mode.kind = SubsetMode::exact_subsets;
    } else if (*o.rho_mode == "sampled") {
      e.rho_mode.kind = SubsetMode::sampled_subsets;
    } else {
      throw ConfigError("config key 'rho_mode.kind': expected 'exact' or 'sampled'");
    }
  }
  if (o.samples) e.rho_mode.sample_count = *o.samples;
  if (o.lambda_grid_cap) e.lambda_grid_cap = *o.lambda_grid_cap;
  if (!o.thresholds.empty()) e.thresholds = o.thresholds;
  if (o.method) {
    if (*o.method != "exact" && *o.method != "monte_carlo") {
      throw ConfigError("config key 'rho.method': expected 'exact' or 'monte_carlo'");
    }
    cfg.rho.method = *o.method;
  }
  try {
    e.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string spectrum_label(const TrialResult& t) {
  if (t.status == TrialStatus::failed) return "failed";
  return t.simple_spectrum == SimpleSpectrum::yes ? "yes" : "indeterminate";
}

std::string status_label(TrialStatus s) { return s == TrialStatus::ok ? "ok" : "failed"; }

struct RunContext {
  RunConfig cfg;
  std::string subcommand;
  std::string hash;
  fs::path out_dir;
  std::vector<std::string> files;
  StatusCounts status;
  std::ostream& out;

  fs::path path(const std::string& name) {
    files.push_back(name);
    return out_dir / name;
  }
  CsvWriter csv(const std::string& name, std::vector<std::string> header) {
    return CsvWriter(path(name), std::move(header), hash);
  }
};

// ---------------------------------------------------------------------------

void write_gap_tables(RunContext& ctx, const TailReport& report) {
  auto gaps_csv = ctx.csv("gaps.csv", {"trial", "delta_min", "argmin", "simple_spectrum"});
  auto trials_csv = ctx.csv("trials.csv", {"trial", "status", "delta_min", "argmin", "simple_spectrum",
                                           "operator_norm", "residual_bound", "gram_deviation",
                                           "trace_error", "interlacing_violations",
                                           "witnesses_checked", "witness_failures",
                                           "max_witness_excess", "error"});
  std::vector<double> deltas;
  for (const TrialResult& t : report.trials) {
    const bool ok = t.status == TrialStatus::ok;
    gaps_csv.row({num(t.trial_index), ok ? num(t.delta_min) : "", ok ? num(t.argmin) : "",
                  spectrum_label(t)});
    trials_csv.row({num(t.trial_index), status_label(t.status), ok ? num(t.delta_min) : "",
                    ok ? num(t.argmin) : "", spectrum_label(t), ok ? num(t.operator_norm) : "",
                    ok ? num(t.residual_bound) : "", ok ? num(t.gram_deviation) : "",
                    ok ? num(t.trace_error) : "", num(t.interlacing_violations),
                    num(t.witnesses_checked), num(t.witness_failures),
                    ok ? num(t.max_witness_excess) : "", t.error});
    if (ok) deltas.push_back(t.delta_min);
  }
  gaps_csv.close();
  trials_csv.close();
  write_histogram_svg(ctx.path("delta_min_hist.svg"), deltas, 30, "delta_min over trials", ctx.hash);

  ctx.status.ok = report.simple_yes + report.indeterminate;
  ctx.status.indeterminate = report.indeterminate;
  ctx.status.failed = report.failed;
}

int run_gaps(RunContext& ctx) {
  const TailReport report = tail_experiment(ctx.cfg.experiment);
  write_gap_tables(ctx, report);
  ctx.out << "gaps: " << report.trials.size() << " trials, " << report.simple_yes
          << " simple, " << report.indeterminate << " indeterminate, " << report.failed
          << " failed\n";
  return report.failed == 0 ? kExitOk : kExitRuntime;
}

int run_tail(RunContext& ctx) {
  const TailReport report = tail_experiment(ctx.cfg.experiment);
  auto tail_csv = ctx.csv("tail.csv", {"threshold", "count", "total", "fraction", "wilson_lo", "wilson_hi"});
  for (const TailRow& row : report.rows) {
    tail_csv.row({num(row.threshold), num(row.count), num(row.total), num(row.fraction),
                  num(row.wilson.lo), num(row.wilson.hi)});
    ctx.out << "P(delta_min <= " << num(row.threshold) << ") ~ " << num(row.fraction) << " ["
            << num(row.wilson.lo) << ", " << num(row.wilson.hi) << "]\n";
  }
  tail_csv.close();
  write_gap_tables(ctx, report);
  return report.failed == 0 ? kExitOk : kExitRuntime;
}

int run_rho(RunContext& ctx) {
  const RhoTask& task = ctx.cfg.rho;
  const DistributionSpec& dist = ctx.cfg.experiment.dist;
  auto csv = ctx.csv("rho.csv", {"radius", "rho", "method", "trials", "std_error", "center"});
  Series curve;
  for (std::size_t k = 0; k < task.radii.size(); ++k) {
    const double r = task.radii[k];
    RhoEstimate est;
    if (task.method == "exact") {
      est = rho_exact(task.x, r, dist);
    } else {
      RngStream rng = derive_trial_stream(ctx.cfg.experiment.master_seed, k);
      est = rho_mc(task.x, r, dist, task.mc_trials, rng);
    }
    csv.row({num(r), num(est.value), est.method == RhoMethod::exact ? "exact" : "monte_carlo",
             num(est.trials), num(est.std_error), num(est.optimal_center)});
    curve.x.push_back(r);
    curve.y.push_back(est.value);
    ctx.out << "rho(x, " << num(r) << ") = " << num(est.value) << "\n";
  }
  csv.close();
  write_polyline_svg(ctx.path("rho_scan.svg"), {curve}, "rho(x, r) against r", ctx.hash);
  ctx.status.ok = task.radii.size();
  return kExitOk;
}

int run_lattice(RunContext& ctx) {
  const LatticeTask& task = ctx.cfg.lattice;
  const LatticeScanResult r = scan_scalings(task.y, task.gamma_min, task.gamma_max, task.step);
  auto csv = ctx.csv("lattice.csv", {"gamma_min", "gamma_max", "grid_step", "grid_points", "best_gamma",
                                     "best_distance", "tau_certified", "interval_lower_bound"});
  csv.row({num(r.gamma_min), num(r.gamma_max), num(r.grid_step), num(r.grid_points),
           num(r.best_gamma), num(r.best_distance), num(r.tau_certified),
           num(r.interval_lower_bound)});
  csv.close();

  // The curve file is thinned to at most ~10^4 points; the scan above is not.
  auto curve_csv = ctx.csv("lattice_scan.csv", {"gamma", "distance"});
  Series curve;
  const std::size_t stride = std::max<std::size_t>(1, r.grid_points / 10000);
  std::vector<double> scaled(task.y.size());
  for (std::size_t k = 0; k < r.grid_points; k += stride) {
    const double gamma = std::min(task.gamma_min + static_cast<double>(k) * task.step, task.gamma_max);
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = gamma * task.y[i];
    const double d = dist_to_lattice(scaled);
    curve_csv.row({num(gamma), num(d)});
    curve.x.push_back(gamma);
    curve.y.push_back(d);
  }
  curve_csv.close();
  write_polyline_svg(ctx.path("lattice_scan.svg"), {curve}, "dist(gamma y, Z^n)", ctx.hash);
  ctx.out << "best gamma " << num(r.best_gamma) << ", distance " << num(r.best_distance)
          << ", certified lower bound " << num(r.interval_lower_bound) << "\n";
  ctx.status.ok = 1;
  return kExitOk;
}

int run_counting(RunContext& ctx) {
  const CountingTask& task = ctx.cfg.counting;
  const DistributionSpec& dist = ctx.cfg.experiment.dist;
  const auto instances = enumerate_S_rho(task.n, task.p, task.thresholds, dist);
  auto csv = ctx.csv("counting.csv", {"n", "p", "threshold", "image_size", "residue_count"});
  const double residues = std::pow(static_cast<double>(task.p), static_cast<double>(task.n));
  for (const CountingInstance& c : instances) {
    csv.row({num(c.n), std::to_string(c.p), num(c.rho_threshold), num(c.image_size), num(residues)});
    ctx.out << "threshold " << num(c.rho_threshold) << ": image size " << c.image_size << "\n";
  }
  csv.close();

  const CountingBound b = counting_bound(task.n, task.m, task.l, task.p, task.rho,
                                         ctx.cfg.experiment.constants.C_37,
                                         dist.subgaussian_constant());
  const auto flag = [](bool v) { return std::string(v ? "1" : "0"); };
  auto bound_csv = ctx.csv("counting_bound.csv",
                           {"n", "m", "l", "p", "rho", "value", "first_term", "second_term",
                            "log_value", "l_at_least_1000K", "l_at_most_sqrt_m",
                            "m_at_most_n_over_log_n", "rho_large_enough", "p_at_least_C_over_rho",
                            "p_at_most_2_pow_n_over_m", "p_odd_prime", "all_hypotheses"});
  const CountingHypotheses& h = b.hypotheses;
  bound_csv.row({num(task.n), num(task.m), num(task.l), std::to_string(task.p), num(task.rho),
                 num(b.value), num(b.first_term), num(b.second_term), num(b.log_value),
                 flag(h.l_at_least_1000K), flag(h.l_at_most_sqrt_m), flag(h.m_at_most_n_over_log_n),
                 flag(h.rho_large_enough), flag(h.p_at_least_C_over_rho),
                 flag(h.p_at_most_2_pow_n_over_m), flag(h.p_odd_prime), flag(h.all())});
  bound_csv.close();
  ctx.status.ok = instances.size();
  return kExitOk;
}

int run_nullvec(RunContext& ctx) {
  const NullVectorReport report = null_vector_experiment(ctx.cfg.experiment);
  auto csv = ctx.csv("nullvec.csv", {"trial", "status", "grid_points", "events", "rich_events", "error"});
  for (const NullVectorTrial& t : report.trials) {
    csv.row({num(t.trial_index), status_label(t.status), num(t.grid_points), num(t.events),
             num(t.rich_events), t.error});
  }
  csv.close();
  auto summary = ctx.csv("nullvec_summary.csv", {"eta", "alpha", "window", "total_events", "rich_events",
                                                 "rich_frequency", "wilson_lo", "wilson_hi", "failed"});
  summary.row({num(report.eta), num(report.alpha), num(report.window), num(report.total_events),
               num(report.rich_events), num(report.rich_frequency), num(report.wilson.lo),
               num(report.wilson.hi), num(report.failed)});
  summary.close();
  ctx.out << "near-null events " << report.total_events << ", rich " << report.rich_events
          << " (frequency " << num(report.rich_frequency) << ")\n";
  ctx.status.ok = report.trials.size() - report.failed;
  ctx.status.failed = report.failed;
  return report.failed == 0 ? kExitOk : kExitRuntime;
}

int run_eigvec(RunContext& ctx) {
  const EigenvectorReport report = eigenvector_structure_experiment(ctx.cfg.experiment);
  auto csv = ctx.csv("eigvec.csv", {"trial", "status", "delta_min", "simple_spectrum", "rich", "poor", "error"});
  for (const TrialResult& t : report.trials) {
    const bool ok = t.status == TrialStatus::ok;
    csv.row({num(t.trial_index), status_label(t.status), ok ? num(t.delta_min) : "",
             spectrum_label(t), num(t.rich_count), num(t.poor_count), t.error});
    if (ok && t.simple_spectrum == SimpleSpectrum::indeterminate) ++ctx.status.indeterminate;
  }
  csv.close();
  auto summary = ctx.csv("eigvec_summary.csv", {"scale", "alpha", "window", "total_rich",
                                                "total_vectors", "rich_frequency", "failed"});
  summary.row({num(report.scale), num(report.alpha), num(report.window), num(report.total_rich),
               num(report.total_vectors), num(report.rich_frequency), num(report.failed)});
  summary.close();
  auto hist = ctx.csv("eigvec_hist.csv", {"rich_count", "trials"});
  std::vector<double> heights;
  for (std::size_t k = 0; k < report.rich_histogram.size(); ++k) {
    hist.row({num(k), num(report.rich_histogram[k])});
    heights.push_back(static_cast<double>(report.rich_histogram[k]));
  }
  hist.close();
  write_bars_svg(ctx.path("eigvec_rich.svg"), heights, "rich eigenvectors per trial", ctx.hash);
  ctx.out << "rich eigenvectors " << report.total_rich << " of " << report.total_vectors << "\n";
  ctx.status.ok = report.trials.size() - report.failed;
  ctx.status.failed = report.failed;
  return report.failed == 0 ? kExitOk : kExitRuntime;
}

int run_verify(RunContext& ctx) {
  const auto checks = run_verify_suite(ctx.cfg);
  auto csv = ctx.csv("verify.csv", {"check", "passed", "detail"});
  for (const VerifyCheck& c : checks) {
    csv.row({c.name, c.passed ? "1" : "0", c.detail});
    ctx.out << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
    if (c.passed) {
      ++ctx.status.ok;
    } else {
      ++ctx.status.failed;
    }
  }
  csv.close();
  return ctx.status.failed == 0 ? kExitOk : kExitVerify;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"eigenvalue-gap experiments for perturbed random symmetric matrices", "gaplab"};
  app.set_version_flag("--version", GAPLAB_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "gaplab_out";
  Overrides o;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--threads", o.threads, "worker threads (default: GAPLAB_THREADS or all cores)");
  app.add_option("--n", o.n, "matrix dimension");
  app.add_option("--trials", o.trials, "number of trials");
  app.add_option("--alpha", o.alpha, "rich/poor threshold");
  app.add_option("--eta", o.eta, "near-null residual scale");
  app.add_option("--nu", o.nu, "structure scale override");
  app.add_option("--beta", o.beta, "regularization fraction override");
  app.add_option("--dist", o.dist, "entry law: rademacher, gaussian, uniform_pm, lazy_rademacher");
  app.add_option("--q", o.q, "mass at zero for lazy_rademacher");
  app.add_option("--perturbation", o.perturbation,
                 "zero, scaled_identity, diagonal_ramp, rank_one, custom");
  app.add_option("--scale", o.scale, "perturbation scale");
  app.add_option("--perturbation-file", o.perturbation_file, "matrix file for custom perturbations");
  app.add_option("--rho-mode", o.rho_mode, "exact or sampled subsets");
  app.add_option("--samples", o.samples, "subset samples in sampled mode");
  app.add_option("--lambda-grid-cap", o.lambda_grid_cap, "maximum shift grid size");
  app.add_option("--thresholds", o.thresholds, "tail thresholds");
  app.add_option("--method", o.method, "rho subcommand: exact or monte_carlo");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"gaps", "per-trial minimum gaps"},
      {"tail", "empirical tail of the minimum gap"},
      {"rho", "concentration function of a fixed vector"},
      {"lattice", "lattice-distance scan over scalings"},
      {"counting", "residue counting and its bound"},
      {"nullvec", "rich/poor structure of near-null vectors"},
      {"eigvec", "rich/poor structure of eigenvectors"},
      {"verify", "built-in exact-oracle self-test"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << GAPLAB_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  RunContext ctx{RunConfig{}, app.get_subcommands().front()->get_name(), "", out_dir, {}, {}, out};
  try {
    if (!config_path.empty()) ctx.cfg = load_config(config_path);
    apply(o, ctx.cfg);
    if (ctx.subcommand == "nullvec" || ctx.subcommand == "eigvec") {
      check_structure_feasible(ctx.cfg.experiment);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  ctx.hash = manifest_hash(ctx.cfg, ctx.subcommand);

  Manifest manifest;
  manifest.version = GAPLAB_VERSION;
  manifest.subcommand = ctx.subcommand;
  manifest.hash = ctx.hash;
  manifest.master_seed = ctx.cfg.experiment.master_seed;
  manifest.config = to_json(ctx.cfg);
  manifest.started_utc = utc_now();

  int code = kExitOk;
  try {
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw OutputError("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
    const std::string& s = ctx.subcommand;
    if (s == "gaps") code = run_gaps(ctx);
    else if (s == "tail") code = run_tail(ctx);
    else if (s == "rho") code = run_rho(ctx);
    else if (s == "lattice") code = run_lattice(ctx);
    else if (s == "counting") code = run_counting(ctx);
    else if (s == "nullvec") code = run_nullvec(ctx);
    else if (s == "eigvec") code = run_eigvec(ctx);
    else code = run_verify(ctx);

    manifest.finished_utc = utc_now();
    manifest.status = ctx.status;
    manifest.files = ctx.files;
    write_manifest(ctx.out_dir / "manifest.json", manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  if (code == kExitRuntime) err << "error: some trials failed; see the per-trial table\n";
  return code;
}

}  // namespace gaplab::cli
