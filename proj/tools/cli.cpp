#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "sparse_spike/baselines.hpp"
#include "sparse_spike/enumerate.hpp"
#include "sparse_spike/errors.hpp"
#include "sparse_spike/harness.hpp"
#include "sparse_spike/huber.hpp"
#include "sparse_spike/instance_io.hpp"
#include "sparse_spike/model.hpp"

namespace sparse_spike {

namespace {

struct Common {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Base seed")->each([&c](const std::string&) { c.seed_given = true; });
  app->add_option("--threads", c.threads, "Worker threads (default: SPARSE_SPIKE_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "Output path (default: stdout where applicable)");
  app->add_flag("--force", c.force, "Run past the enumeration budget guard");
}

// Writes to --out when given, else to `fallback`.
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  write(file);
  if (!file) throw std::runtime_error("failed writing " + path);
}

struct GenArgs {
  std::string model;
  Index d = 0;
  Index k = 0;
  Index n = 0;
  double signal = 0.0;
  bool gaussian_spike = false;
  std::string noise = "cauchy";
  double noise_scale = 1.0;
  std::string adversary;
  double strength = 0.0;
};

void run_gen(const GenArgs& a, const Common& c, std::ostream& out) {
  if (c.out.empty()) throw ConfigError("gen: --out is required");
  const ModelKind model = parse_model_kind(a.model);
  if (a.d < 1 || a.k < 1 || a.k > a.d) throw ConfigError("gen: need 1 <= k <= d");
  if (is_wishart_type(model) && a.n < 1) throw ConfigError("gen: --n is required for this model");
  const SparseSpike spike = gen_sparse_spike(a.d, a.k, !a.gaussian_spike, sub_seed(c.seed, "trial.spike"));
  Instance inst;
  switch (model) {
    case ModelKind::kWishart:
      inst = gen_wishart(a.n, spike, a.signal, c.seed);
      break;
    case ModelKind::kWigner:
      inst = gen_wigner(spike, a.signal, c.seed);
      break;
    case ModelKind::kPlantedVector:
      inst = gen_planted_vector(a.n, spike, c.seed);
      break;
    case ModelKind::kSymmetric: {
      const NoiseFamily family = parse_noise_family(a.noise);
      if (family == NoiseFamily::kCustomSymmetric) throw ConfigError("gen: custom noise needs the library API");
      inst = gen_symmetric(spike, a.signal, NoiseSpec{family, a.noise_scale, {}}, c.seed);
      break;
    }
  }
  if (!a.adversary.empty()) {
    inst = make_adversary(inst, parse_adversary_kind(a.adversary), a.strength,
                          sub_seed(c.seed, "trial.adversary"));
  }
  save_instance(inst, c.out);
  out << "wrote " << to_string(inst.model) << ' ' << inst.data.rows() << 'x' << inst.data.cols()
      << " instance to " << c.out << '\n';
}

struct RecoverArgs {
  std::string input;
  std::string algorithm = "enumerate";
  Index k = 0;
  Index t = 1;
  double delta = 0.1;
  double lambda = 0.0;
  double alpha = 0.5;
  double flatness = 1.5;
  double huber_delta = 0.05;
  long huber_iters = 400;
  long sdp_iters = 2000;
  double sdp_tol = 1e-3;
  double cov_c = 4.0;
  double tau = -1.0;
  std::string add_matrix;
};

void run_recover(const RecoverArgs& a, const Common& c, std::ostream& out) {
  Instance inst = load_instance(a.input);
  if (!a.add_matrix.empty()) {
    const Eigen::MatrixXd e = load_matrix(a.add_matrix);
    if (e.rows() != inst.data.rows() || e.cols() != inst.data.cols()) {
      throw ConfigError("recover: --add-matrix dimensions do not match the instance");
    }
    inst.data += e;
  }
  SweepConfig cfg;
  cfg.model = inst.model;
  cfg.d = inst.dim();
  cfg.k = a.k > 0 ? a.k : inst.spike.sparsity();
  cfg.n = inst.samples();
  cfg.t = a.t;
  cfg.delta = a.delta;
  cfg.alpha = a.alpha;
  cfg.flatness = a.flatness;
  cfg.huber_delta = a.huber_delta;
  cfg.huber_iters = a.huber_iters;
  cfg.sdp_iters = a.sdp_iters;
  cfg.sdp_tol = a.sdp_tol;
  cfg.cov_c = a.cov_c;
  if (a.tau >= 0.0) cfg.cov_tau = a.tau;
  cfg.force = c.force;
  cfg.signals = {inst.signal};
  const Algorithm algorithm = parse_algorithm(a.algorithm);
  cfg.algorithms = {algorithm};
  if (a.lambda > 0.0) inst.signal = a.lambda;
  cfg.validate();
  const RecoveryResult result = run_algorithm(algorithm, inst, cfg, c.threads);
  emit(c.out, out, [&](std::ostream& o) { o << result_json(result) << '\n'; });
}

struct SweepArgs {
  std::string config;
  std::string summary;
  bool timing = false;
  bool print_config = false;
};

void run_sweep_command(const SweepArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config, std::ios::binary);
  if (!in) throw ConfigError("sweep: cannot read config " + a.config);
  std::stringstream text;
  text << in.rdbuf();
  SweepConfig cfg = parse_sweep_config(text.str());
  if (c.seed_given) cfg.seed = c.seed;
  if (c.threads > 0) cfg.threads = c.threads;
  if (c.force) cfg.force = true;
  if (a.print_config) err << sweep_config_json(cfg) << '\n';
  const SweepResult result = run_sweep(cfg);
  emit(c.out, out, [&](std::ostream& o) { write_csv(o, cfg, result.rows, a.timing); });
  if (!a.summary.empty()) {
    emit(a.summary, out, [&](std::ostream& o) { write_summary_json(o, result.summary); });
  }
  for (const SummaryRow& s : result.summary) {
    err << std::left << std::setw(18) << to_string(s.algorithm) << " signal " << std::setw(10)
        << s.signal << " success " << s.successes << '/' << s.trials;
    if (s.errors > 0) err << " (" << s.errors << " errors)";
    err << '\n';
  }
}

struct BenchArgs {
  Index d = 100;
  Index n = 200;
  Index k = 5;
  Index t = 2;
  double beta = 2.0;
  bool json = false;
};

void run_bench_command(const BenchArgs& a, const Common& c, std::ostream& out) {
  const std::vector<BenchRow> rows = run_bench(a.d, a.n, a.k, a.t, a.beta, c.seed, c.threads, c.force);
  emit(c.out, out, [&](std::ostream& o) {
    if (a.json) {
      o << "[";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const BenchRow& r = rows[i];
        o << (i == 0 ? "\n" : ",\n") << "  {\"t\": " << r.t << ", \"patterns\": " << r.patterns
          << ", \"grid\": " << r.grid << ", \"eigenproblems\": " << r.eigenproblems
          << ", \"wall_time\": " << r.wall_time << ", \"correlation\": " << r.correlation << "}";
      }
      o << "\n]\n";
      return;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-3s %14s %6s %14s %12s %12s\n", "t", "patterns", "grid",
                  "eigenproblems", "seconds", "correlation");
    o << line;
    for (const BenchRow& r : rows) {
      std::snprintf(line, sizeof line, "%-3lld %14llu %6zu %14llu %12.4f %12.6f\n",
                    static_cast<long long>(r.t), static_cast<unsigned long long>(r.patterns), r.grid,
                    static_cast<unsigned long long>(r.eigenproblems), r.wall_time, r.correlation);
      o << line;
    }
  });
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse spike recovery by subset enumeration", "sparse_spike"};
  app.require_subcommand(1);

  Common common;
  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  add_common(gen_cmd, common);
  gen_cmd->add_option("--model", gen.model, "wishart | wigner | planted-vector | symmetric")->required();
  gen_cmd->add_option("--d", gen.d, "Dimension")->required();
  gen_cmd->add_option("--k", gen.k, "Sparsity")->required();
  gen_cmd->add_option("--n", gen.n, "Samples (wishart-type models)");
  gen_cmd->add_option("--signal", gen.signal, "beta or lambda");
  gen_cmd->add_flag("--gaussian-spike", gen.gaussian_spike, "Gaussian instead of flat nonzeros");
  gen_cmd->add_option("--noise", gen.noise, "gaussian | cauchy | scaled-rademacher (symmetric model)");
  gen_cmd->add_option("--noise-scale", gen.noise_scale, "Noise scale");
  gen_cmd->add_option("--adversary", gen.adversary, "projection | signal-erasing | column-spike");
  gen_cmd->add_option("--strength", gen.strength, "Perturbation strength");

  RecoverArgs rec;
  CLI::App* rec_cmd = app.add_subcommand("recover", "Recover the spike of one instance, print JSON");
  add_common(rec_cmd, common);
  rec_cmd->add_option("--in", rec.input, "Instance file")->required();
  rec_cmd->add_option("--algorithm", rec.algorithm,
                      "enumerate | enumerate-robust | huber | pca | diag | covthresh | lbf");
  rec_cmd->add_option("--k", rec.k, "Sparsity (default: the instance's)");
  rec_cmd->add_option("--t", rec.t, "Pattern order");
  rec_cmd->add_option("--delta", rec.delta, "Accuracy parameter in (0, 0.1]");
  rec_cmd->add_option("--lambda", rec.lambda, "Signal strength for huber (default: the instance's)");
  rec_cmd->add_option("--alpha", rec.alpha, "Noise mass in [-1, 1] (huber)");
  rec_cmd->add_option("--A", rec.flatness, "Flatness bound (huber)");
  rec_cmd->add_option("--huber-delta", rec.huber_delta, "Acceptance delta (huber)");
  rec_cmd->add_option("--huber-iters", rec.huber_iters, "Iteration budget per block (huber)");
  rec_cmd->add_option("--sdp-iters", rec.sdp_iters, "Iteration budget per SDP (enumerate-robust)");
  rec_cmd->add_option("--sdp-tol", rec.sdp_tol, "Relative SDP gap tolerance");
  rec_cmd->add_option("--cov-c", rec.cov_c, "Threshold constant (covthresh)");
  rec_cmd->add_option("--tau", rec.tau, "Explicit threshold (covthresh)");
  rec_cmd->add_option("--add-matrix", rec.add_matrix, "JSON header of a matrix added to the data");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a Monte-Carlo sweep, write CSV");
  add_common(sweep_cmd, common);
  sweep_cmd->add_option("--config", sweep.config, "JSON configuration")->required();
  sweep_cmd->add_option("--summary", sweep.summary, "Write success rates as JSON");
  sweep_cmd->add_flag("--timing", sweep.timing, "Append a wall_time column");
  sweep_cmd->add_flag("--print-config", sweep.print_config, "Echo the resolved configuration to stderr");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time enumeration against pattern counts");
  add_common(bench_cmd, common);
  bench_cmd->add_option("--d", bench.d, "Dimension");
  bench_cmd->add_option("--n", bench.n, "Samples");
  bench_cmd->add_option("--k", bench.k, "Sparsity");
  bench_cmd->add_option("--t", bench.t, "Largest pattern order");
  bench_cmd->add_option("--beta", bench.beta, "Signal strength");
  bench_cmd->add_flag("--json", bench.json, "JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_cmd->parsed()) run_gen(gen, common, out);
    if (rec_cmd->parsed()) run_recover(rec, common, out);
    if (sweep_cmd->parsed()) run_sweep_command(sweep, common, out, err);
    if (bench_cmd->parsed()) run_bench_command(bench, common, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace sparse_spike
