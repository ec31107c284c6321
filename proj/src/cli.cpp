#include "cllb/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "cllb/covariance.hpp"
#include "cllb/error.hpp"
#include "cllb/io.hpp"
#include "cllb/lil.hpp"
#include "cllb/params.hpp"
#include "cllb/sampler.hpp"
#include "cllb/smallball.hpp"

namespace cllb::cli {

namespace {

using io::fmt;

struct Common {
  std::string config;
  double alpha = 2.0;
  double hurst = 0.5;
  double beta = 1.0;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out = "-";
  bool plot = false;

  ModelParams params() const { return {alpha, hurst, beta}; }
};

void add_common(CLI::App* app, Common& c, bool model = true) {
  app->add_option("--config", c.config, "Flat key = value file; command-line flags take precedence");
  if (model) {
    app->add_option("--alpha", c.alpha, "Order of the fractional Laplacian, in (1,2]");
    app->add_option("--hurst", c.hurst, "Spatial Hurst parameter H, in ((2-alpha)/2, 1)");
    app->add_option("--beta", c.beta, "Localization exponent beta > 0");
  }
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--workers", c.workers, "Worker threads (0 = CLLB_WORKERS or all cores)");
  app->add_option("--out", c.out, "Output file ('-' for stdout)");
  app->add_flag("--plot", c.plot, "Also write a matplotlib script next to the output");
}

/// Output file or the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool binary = false) : path_(path) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) throw ValidationError("cannot open output file " + path);
    os_ = file_.get();
  }
  std::ostream& operator*() { return *os_; }
  bool is_file() const { return file_ != nullptr; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

void write_header(std::ostream& os, const CLI::App* sub) {
  os << "# cllb " << CLLB_VERSION << "\n";
  os << "# command: " << sub->get_name() << "\n";
  std::istringstream cfg(sub->config_to_str(true, false));
  std::string line;
  while (std::getline(cfg, line)) {
    if (line.empty() || line.rfind("config=", 0) == 0) continue;
    os << "# " << line << "\n";
  }
}

void write_plot_script(const Sink& sink, const std::string& body) {
  if (!sink.is_file()) throw ValidationError("--plot requires --out <file>");
  std::ofstream py(sink.path() + ".plot.py");
  py << "#!/usr/bin/env python3\n"
     << "import sys\nimport numpy as np\nimport matplotlib\nmatplotlib.use('Agg')\n"
     << "import matplotlib.pyplot as plt\n\n"
     << "path = sys.argv[1] if len(sys.argv) > 1 else " << "'" << sink.path() << "'\n"
     << body;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("not a number: '" + item + "'");
    }
  }
  return v;
}

TimeGrid parse_grid(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  std::string normalized = rest;
  std::replace(normalized.begin(), normalized.end(), ':', ',');
  const auto v = parse_list(normalized);
  if (kind == "uniform" && v.size() == 2) return TimeGrid::uniform(v[0], static_cast<std::size_t>(v[1]));
  if (kind == "geometric" && v.size() == 3) {
    return TimeGrid::geometric(v[0], v[1], static_cast<std::size_t>(v[2]));
  }
  if (kind == "list" && !v.empty()) return TimeGrid(v);
  throw ValidationError("grid spec must be uniform:T:M, geometric:LO:HI:M or list:t1,t2,...");
}

// ---------------------------------------------------------------- constants

struct ConstantsCmd {
  Common common;
};

void run_constants(const ConstantsCmd& cmd, const CLI::App* sub, std::ostream& out) {
  const DerivedConstants c = derive(cmd.common.params());
  Sink sink(cmd.common.out, out);
  write_header(*sink, sub);
  *sink << "theta=" << fmt(c.theta) << "\n"
        << "c_h=" << fmt(c.c_h) << "\n"
        << "c21=" << fmt(c.c21) << "\n"
        << "c21_reference_form=" << fmt(c21_reference_form(cmd.common.alpha, cmd.common.hurst)) << "\n"
        << "kappa=" << fmt(c.kappa) << "\n"
        << "underflow_n_max=" << t_seq_underflow_limit(cmd.common.beta) << "\n";
}

// ---------------------------------------------------------------- cov-verify

struct CovVerifyCmd {
  Common common;
  int points = 10;
  double tolerance = 1e-6;
};

void run_cov_verify(const CovVerifyCmd& cmd, const CLI::App* sub, std::ostream& out) {
  std::vector<ModelParams> pairs;
  if (sub->count("--alpha") > 0 || sub->count("--hurst") > 0) {
    pairs.push_back(cmd.common.params());
  } else {
    pairs = {{2.0, 0.5, 1.0}, {1.5, 0.75, 1.0}, {1.8, 0.3, 1.0}, {1.2, 0.9, 1.0}, {2.0, 0.85, 1.0}};
  }
  if (cmd.points < 1) throw ValidationError("--points must be >= 1");
  Sink sink(cmd.common.out, out);
  write_header(*sink, sub);
  *sink << "alpha,H,s,t,closed,quadrature,rel_err\n";
  double worst = 0.0;
  for (const auto& p : pairs) {
    const DerivedConstants c = derive(p);
    for (int i = 1; i <= cmd.points; ++i) {
      for (int j = 1; j <= cmd.points; ++j) {
        const double s = static_cast<double>(i) / cmd.points;
        const double t = static_cast<double>(j) / cmd.points;
        const double closed = cov_closed(s, t, c);
        const double quad = cov_quadrature(s, t, p);
        const double rel = std::abs(closed - quad) / std::abs(quad);
        worst = std::max(worst, rel);
        *sink << fmt(p.alpha) << ',' << fmt(p.hurst) << ',' << fmt(s) << ',' << fmt(t) << ','
              << fmt(closed) << ',' << fmt(quad) << ',' << fmt(rel) << "\n";
      }
    }
  }
  *sink << "# max_rel_err=" << fmt(worst) << "\n";
  if (!(worst < cmd.tolerance)) {
    throw NumericalError("closed form and quadrature disagree: max relative error " + fmt(worst));
  }
}

// ---------------------------------------------------------------- sample

struct SampleCmd {
  Common common;
  std::string process = "sfhe";
  double hurst_index = 0.5;
  std::string grid = "uniform:1:16";
  std::optional<double> slab_start;
  std::size_t count = 1000;
  std::string format = "csv";
};

void run_sample(const SampleCmd& cmd, const CLI::App* sub, std::ostream& out) {
  const TimeGrid grid = parse_grid(cmd.grid);
  CovMatrix cov = cmd.process == "fbm"
                      ? build_fbm_cov_matrix(grid, cmd.hurst_index)
                      : build_cov_matrix(grid, derive(cmd.common.params()), cmd.slab_start);
  if (cmd.process == "fbm" && cmd.slab_start) throw ValidationError("--slab-start applies to sfhe only");
  const PathEnsemble ens = sample(cov, cmd.count, cmd.common.seed, {0, cmd.common.workers});

  if (cmd.format == "binary") {
    Sink sink(cmd.common.out, out, true);
    if (!sink.is_file()) throw ValidationError("binary output requires --out <file>");
    io::write_binary(*sink, ens.paths);
    std::ofstream meta(sink.path() + ".meta");
    write_header(meta, sub);
    meta << "# jitter_steps=" << ens.jitter_steps << "\n# grid=";
    for (std::size_t i = 0; i < grid.size(); ++i) meta << (i ? "," : "") << fmt(grid[i]);
    meta << "\n";
    return;
  }
  Sink sink(cmd.common.out, out);
  write_header(*sink, sub);
  *sink << "# jitter_steps=" << ens.jitter_steps << "\n";
  *sink << "path";
  for (std::size_t i = 0; i < grid.size(); ++i) *sink << ",t=" << fmt(grid[i]);
  *sink << "\n";
  for (Eigen::Index p = 0; p < ens.paths.rows(); ++p) {
    *sink << p;
    for (Eigen::Index i = 0; i < ens.paths.cols(); ++i) *sink << ',' << fmt(ens.paths(p, i));
    *sink << "\n";
  }
  if (cmd.common.plot) {
    write_plot_script(sink,
                      "with open(path) as f:\n"
                      "    header = [l for l in f if not l.startswith('#')][0].strip().split(',')\n"
                      "t = np.array([float(h[2:]) for h in header[1:]])\n"
                      "data = np.loadtxt(path, delimiter=',', comments='#', skiprows=1)\n"
                      "data = np.atleast_2d(data)[:, 1:]\n"
                      "for row in data[:20]:\n    plt.plot(t, row, lw=0.7)\n"
                      "plt.xlabel('t'); plt.ylabel('X(t)')\nplt.savefig(path + '.png', dpi=150)\n");
  }
}

// ---------------------------------------------------------------- smallball

struct SmallBallCmd {
  Common common;
  std::string process = "sfhe";
  double hurst_index = 0.5;
  double horizon = 1.0;
  std::string eps;
  double eps_max = 0.0;
  double eps_ratio = 0.75;
  int eps_count = 8;
  std::size_t count = 100000;
  std::size_t grid_size = 1024;
  std::size_t check_grid = 0;
  std::size_t min_hits = 20;
  std::string estimator = "grid-max";
};

struct SmallBallOutcome {
  SmallBallCurve curve;
  std::optional<SmallBallFit> fit;
  std::string fit_error;
  std::optional<ResolutionCheck> check;
  std::size_t check_grid = 0;
};

SmallBallOutcome smallball_pipeline(const ProcessSpec& spec, std::vector<double> eps,
                                    const CurveOptions& opts, std::size_t check_grid,
                                    std::size_t min_hits) {
  SmallBallOutcome r;
  if (eps.empty()) {
    // Choose radii from the ensemble itself so every point is Monte Carlo visible.
    const CholeskyFactor f = factorize(process_cov_matrix(spec, opts.grid_size));
    const auto maxima = sample_max_abs(f, opts.count, opts.seed, {0, opts.workers});
    eps = auto_epsilons(maxima, 8, 0.1, min_hits);
    r.curve = curve_from_maxima(maxima, eps, opts.grid_size, spec.kind);
  } else {
    r.curve = estimate_curve(spec, eps, opts);
  }
  try {
    r.fit = fit_rate(r.curve, spec.scaling_index(), {min_hits});
  } catch (const NumericalError& e) {
    r.fit_error = e.what();
  }
  if (check_grid > 0) {
    CurveOptions coarse = opts;
    coarse.grid_size = check_grid;
    coarse.seed = opts.seed + 1;
    r.check = compare_resolutions(estimate_curve(spec, r.curve.epsilons, coarse), r.curve);
    r.check_grid = check_grid;
  }
  return r;
}

ProcessSpec smallball_spec(const SmallBallCmd& cmd) {
  if (cmd.process == "fbm") return ProcessSpec::fbm(cmd.hurst_index, cmd.horizon);
  return ProcessSpec::sfhe(derive(cmd.common.params()), cmd.horizon);
}

void run_smallball(const SmallBallCmd& cmd, const CLI::App* sub, std::ostream& out) {
  const ProcessSpec spec = smallball_spec(cmd);
  std::vector<double> eps = parse_list(cmd.eps);
  if (eps.empty() && cmd.eps_max > 0.0) eps = epsilon_schedule(cmd.eps_max, cmd.eps_ratio, cmd.eps_count);
  CurveOptions opts;
  opts.count = cmd.count;
  opts.grid_size = cmd.grid_size;
  opts.seed = cmd.common.seed;
  opts.workers = cmd.common.workers;
  opts.estimator = cmd.estimator == "bridge" ? SupEstimator::brownian_bridge : SupEstimator::grid_max;
  if (opts.estimator == SupEstimator::brownian_bridge && eps.empty()) {
    throw ValidationError("the bridge estimator needs explicit radii (--eps or --eps-max)");
  }
  const SmallBallOutcome r = smallball_pipeline(spec, eps, opts, cmd.check_grid, cmd.min_hits);

  Sink sink(cmd.common.out, out);
  write_header(*sink, sub);
  *sink << "epsilon,prob,stderr,count,grid_size\n";
  const auto& c = r.curve;
  for (std::size_t i = 0; i < c.size(); ++i) {
    *sink << fmt(c.epsilons[i]) << ',' << fmt(c.probabilities[i]) << ',' << fmt(c.stderrs[i]) << ','
          << c.counts[i] << ',' << c.grid_size << "\n";
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c.zero_hit(i)) *sink << "# zero_hit epsilon=" << fmt(c.epsilons[i]) << "\n";
  }
  if (r.fit) {
    *sink << "# fit exponent=" << fmt(r.fit->exponent) << " constant=" << fmt(r.fit->constant)
          << " stderr_exponent=" << fmt(r.fit->stderr_exponent)
          << " stderr_constant=" << fmt(r.fit->stderr_constant) << " points=" << r.fit->points_used
          << "\n";
    if (spec.kind == ProcessKind::sfhe) {
      const auto lam = lambda_from_fit(*r.fit, spec.consts);
      *sink << "# lambda_hat=" << fmt(lam.value) << " lambda_stderr=" << fmt(lam.stderr) << "\n";
    }
    for (const auto& w : r.fit->warnings) *sink << "# warning: " << w << "\n";
  } else {
    *sink << "# fit unavailable: " << r.fit_error << "\n";
  }
  if (r.check) {
    *sink << "# resolution_check coarse_grid=" << r.check_grid << " max_abs_z=" << fmt(r.check->max_abs_z)
          << " consistent=" << (r.check->consistent ? "yes" : "no") << "\n";
    if (!r.check->consistent) {
      *sink << "# warning: grid-max estimates moved by more than 2 standard errors between grids; "
               "the fit carries discretization bias\n";
    }
  }
  if (cmd.common.plot) {
    write_plot_script(sink,
                      "d = np.atleast_2d(np.loadtxt(path, delimiter=',', comments='#', skiprows=1))\n"
                      "ok = d[:, 1] > 0\n"
                      "plt.errorbar(1 / d[ok, 0], -np.log(d[ok, 1]), yerr=d[ok, 2] / d[ok, 1], fmt='o')\n"
                      "plt.xscale('log'); plt.yscale('log')\n"
                      "plt.xlabel('1/epsilon'); plt.ylabel('-log P')\nplt.savefig(path + '.png', dpi=150)\n");
  }
}

// ---------------------------------------------------------------- lil

struct LilCmd {
  Common common;
  int n_min = 2;
  int n_max = 26;
  std::size_t grid_points = 1024;
  std::size_t count = 200;
  std::string y_mode = "marginal";
  double lambda_hat = 0.0;
  double lambda_stderr = 0.0;
  std::size_t sb_count = 100000;
  std::size_t sb_grid = 2048;
  double delta = 0.0;
  double gamma = 0.0;
  bool no_refine = false;
};

void run_lil(const LilCmd& cmd, const CLI::App* sub, std::ostream& out) {
  const ModelParams params = validate(cmd.common.params());
  const DerivedConstants c = derive(params);
  const LocalizationPlan plan = build_plan(params, cmd.n_min, cmd.n_max, cmd.grid_points);

  LambdaEstimate lambda{cmd.lambda_hat, cmd.lambda_stderr};
  std::string lambda_source = "given";
  if (!(lambda.value > 0.0)) {
    CurveOptions opts;
    opts.count = cmd.sb_count;
    opts.grid_size = cmd.sb_grid;
    opts.seed = cmd.common.seed ^ 0x5bd1e995u;
    opts.workers = cmd.common.workers;
    const auto r = smallball_pipeline(ProcessSpec::sfhe(c), {}, opts, 0, 20);
    if (!r.fit) throw NumericalError("lambda estimation failed: " + r.fit_error);
    lambda = lambda_from_fit(*r.fit, c);
    lambda_source = "smallball";
  }

  BlockOptions bo;
  bo.workers = cmd.common.workers;
  bo.y_mode = cmd.y_mode == "joint" ? YMode::joint : YMode::marginal;
  const Blocks blocks = simulate_blocks(plan, c, cmd.count, cmd.common.seed, bo);
  const LilStatistics st = compute_statistics(blocks, c, lambda);

  Sink sink(cmd.common.out, out);
  write_header(*sink, sub);
  if (plan.clamped) {
    *sink << "# n_max clamped from " << plan.requested_n_max << " to " << plan.n_max
          << " (t_n must stay above 1e-300)\n";
  }
  *sink << "realization,n,sup_u_over_psi,sup_un_over_psi,sup_yn_over_psi,running_min_un,running_min_u\n";
  for (std::size_t p = 0; p < st.realizations.size(); ++p) {
    for (const auto& r : st.realizations[p]) {
      *sink << p << ',' << r.n << ',' << fmt(r.sup_u_over_psi) << ',' << fmt(r.sup_un_over_psi) << ','
            << fmt(r.sup_yn_over_psi) << ',' << fmt(r.running_min_un) << ',' << fmt(r.running_min_u)
            << "\n";
    }
  }

  nlohmann::ordered_json summary;
  summary["kappa"] = c.kappa;
  summary["theta"] = c.theta;
  summary["lambda_hat"] = {{"value", lambda.value}, {"stderr", lambda.stderr}, {"source", lambda_source}};
  summary["predicted_kappa_lambda_theta"] = {{"value", st.predicted}, {"stderr", st.predicted_stderr}};
  summary["observed_median_running_min_un"] = st.median_running_min_un;
  summary["observed_median_running_min_u"] = st.median_running_min_u;
  summary["ratio_observed_to_predicted"] = st.median_running_min_un / st.predicted;
  summary["bracket"] = {0.5 * st.predicted, 2.0 * st.predicted};
  summary["in_bracket"] = st.median_running_min_un >= 0.5 * st.predicted &&
                          st.median_running_min_un <= 2.0 * st.predicted;
  summary["monotonicity_violations"] = st.monotonicity_violations;
  summary["triangle_violations"] = st.triangle_violations;
  summary["n_max"] = plan.n_max;
  summary["realizations"] = cmd.count;
  if (!cmd.no_refine) {
    const auto gap = refinement_gap(plan, c, std::min<std::size_t>(cmd.count, 200), cmd.common.seed + 7,
                                    cmd.common.workers);
    summary["refinement"] = {{"pooled_rel_gap", gap.pooled},
                             {"stderr", gap.pooled_stderr},
                             {"stable", std::abs(gap.pooled) < 0.05 + 2.0 * gap.pooled_stderr}};
  }
  if (cmd.delta > 0.0 || cmd.gamma > 0.0) {
    const double delta = cmd.delta > 0.0 ? cmd.delta : 10.0 * std::sqrt(c.c21);
    const double gamma =
        cmd.gamma > 0.0 ? cmd.gamma : std::pow(1.0 + 2.0 * params.beta, c.theta) * st.predicted;
    const LemmaReport rep = check_lemma_bounds(blocks, c, delta, gamma, lambda);
    nlohmann::ordered_json rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
      rows.push_back({{"n", r.n},
                      {"freq_early_exceed", r.freq_early_exceed},
                      {"freq_yn_exceed", r.freq_yn_exceed},
                      {"borell_shape", r.borell_shape},
                      {"p_small_ball", r.p_small_ball},
                      {"partial_sum", r.partial_sum}});
    }
    summary["lemma"] = {{"delta", delta},
                        {"gamma", gamma},
                        {"predicted_slope", rep.predicted_slope},
                        {"fitted_slope", rep.slope_available ? rep.slope_fit.slope : NAN},
                        {"fitted_slope_stderr", rep.slope_available ? rep.slope_fit.se_slope : NAN},
                        {"rows", rows}};
  }
  std::istringstream lines(summary.dump(2));
  std::string line;
  *sink << "# summary\n";
  while (std::getline(lines, line)) *sink << "# " << line << "\n";

  if (cmd.common.plot) {
    write_plot_script(sink,
                      "d = np.loadtxt(path, delimiter=',', comments='#', skiprows=1)\n"
                      "for r in np.unique(d[:, 0])[:50]:\n"
                      "    s = d[d[:, 0] == r]\n"
                      "    plt.plot(s[:, 1], s[:, 5], color='C0', alpha=0.2)\n"
                      "plt.xlabel('n'); plt.ylabel('running min of sup|u_n|/psi(t_n)')\n"
                      "plt.savefig(path + '.png', dpi=150)\n");
  }
}

// ---------------------------------------------------------------- driver

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::vector<std::string> out{args.front()};
  for (const auto& [key, value] : io::parse_config_file(path)) {
    out.push_back("--" + key);
    out.push_back(value);
  }
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

void error_line(std::ostream& err, ErrorKind kind, const std::string& message) {
  static constexpr const char* names[] = {"", "usage", "validation", "numerical"};
  nlohmann::json j = message;
  err << "error kind=" << names[static_cast<int>(kind)] << " code=" << static_cast<int>(kind)
      << " message=" << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for Chung's LIL of the linear stochastic fractional heat equation", "cllb"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  ConstantsCmd constants;
  auto* s_const = app.add_subcommand("constants", "Print derived constants theta, C_H, c21, kappa");
  add_common(s_const, constants.common);

  CovVerifyCmd covv;
  auto* s_cov = app.add_subcommand("cov-verify", "Closed-form covariance against spectral quadrature");
  add_common(s_cov, covv.common);
  s_cov->add_option("--points", covv.points, "Grid points per axis on (0,1]");
  s_cov->add_option("--tolerance", covv.tolerance, "Maximum accepted relative error");

  SampleCmd samp;
  auto* s_sample = app.add_subcommand("sample", "Draw exact Gaussian paths");
  add_common(s_sample, samp.common);
  s_sample->add_option("--process", samp.process, "sfhe | fbm")->check(CLI::IsMember({"sfhe", "fbm"}));
  s_sample->add_option("--hurst-index", samp.hurst_index, "fBm Hurst index");
  s_sample->add_option("--grid", samp.grid, "uniform:T:M | geometric:LO:HI:M | list:t1,t2,...");
  s_sample->add_option("--slab-start", samp.slab_start, "Start of the noise window (slab field u_n)");
  s_sample->add_option("--count", samp.count, "Number of paths");
  s_sample->add_option("--format", samp.format, "csv | binary")->check(CLI::IsMember({"csv", "binary"}));

  SmallBallCmd sb;
  auto* s_sb = app.add_subcommand("smallball", "Monte Carlo small-ball curve and rate fit");
  add_common(s_sb, sb.common);
  s_sb->add_option("--process", sb.process, "sfhe | fbm")->check(CLI::IsMember({"sfhe", "fbm"}));
  s_sb->add_option("--hurst-index", sb.hurst_index, "fBm Hurst index");
  s_sb->add_option("--horizon", sb.horizon, "Observation window [0, horizon]");
  s_sb->add_option("--eps", sb.eps, "Comma-separated decreasing radii");
  s_sb->add_option("--eps-max", sb.eps_max, "Largest radius of a geometric schedule (0 = automatic)");
  s_sb->add_option("--eps-ratio", sb.eps_ratio, "Ratio of the geometric schedule");
  s_sb->add_option("--eps-count", sb.eps_count, "Length of the geometric schedule");
  s_sb->add_option("--count", sb.count, "Monte Carlo paths");
  s_sb->add_option("--grid-size", sb.grid_size, "Uniform grid points on (0, horizon]");
  s_sb->add_option("--check-grid", sb.check_grid, "Second grid for the resolution check (0 = off)");
  s_sb->add_option("--min-hits", sb.min_hits, "Minimum hits for a radius to enter the fit");
  s_sb->add_option("--estimator", sb.estimator, "grid-max | bridge (Brownian motion only)")
      ->check(CLI::IsMember({"grid-max", "bridge"}));

  LilCmd lil;
  auto* s_lil = app.add_subcommand("lil", "Localization experiment for the Chung LIL at t = 0");
  add_common(s_lil, lil.common);
  s_lil->add_option("--n-min", lil.n_min, "First slab index");
  s_lil->add_option("--n-max", lil.n_max, "Last slab index (clamped at the underflow limit)");
  s_lil->add_option("--grid-points", lil.grid_points, "Geometric grid points per slab (>= 128)");
  s_lil->add_option("--count", lil.count, "Independent realizations");
  s_lil->add_option("--y-mode", lil.y_mode, "marginal | joint")->check(CLI::IsMember({"marginal", "joint"}));
  s_lil->add_option("--lambda-hat", lil.lambda_hat, "Small-ball constant estimate (0 = estimate)");
  s_lil->add_option("--lambda-stderr", lil.lambda_stderr, "Standard error of --lambda-hat");
  s_lil->add_option("--sb-count", lil.sb_count, "Paths for the lambda estimate");
  s_lil->add_option("--sb-grid", lil.sb_grid, "Grid for the lambda estimate");
  s_lil->add_option("--delta", lil.delta, "Threshold for the tail-event report (0 = off unless --gamma)");
  s_lil->add_option("--gamma", lil.gamma, "Small-ball level for the lemma report");
  s_lil->add_flag("--no-refine", lil.no_refine, "Skip the grid-doubling stability check");

  try {
    std::vector<std::string> expanded = expand_config(args);
    std::reverse(expanded.begin(), expanded.end());
    app.parse(expanded);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, ErrorKind::usage, e.what());
    return static_cast<int>(ErrorKind::usage);
  } catch (const Error& e) {
    error_line(err, ErrorKind::usage, e.what());
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (s_const->parsed()) run_constants(constants, s_const, out);
    else if (s_cov->parsed()) run_cov_verify(covv, s_cov, out);
    else if (s_sample->parsed()) run_sample(samp, s_sample, out);
    else if (s_sb->parsed()) run_smallball(sb, s_sb, out);
    else if (s_lil->parsed()) run_lil(lil, s_lil, out);
  } catch (const Error& e) {
    error_line(err, e.kind(), e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    error_line(err, ErrorKind::numerical, e.what());
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cllb::cli
