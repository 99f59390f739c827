#include "sparse_spike/harness.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sparse_spike/baselines.hpp"
#include "sparse_spike/enumerate.hpp"
#include "sparse_spike/errors.hpp"
#include "sparse_spike/huber.hpp"
#include "sparse_spike/parallel.hpp"

namespace sparse_spike {

namespace {

using nlohmann::json;

constexpr std::pair<Algorithm, std::string_view> kAlgorithmNames[] = {
    {Algorithm::kEnumerate, "enumerate"}, {Algorithm::kEnumerateRobust, "enumerate-robust"},
    {Algorithm::kHuber, "huber"},         {Algorithm::kPca, "pca"},
    {Algorithm::kDiag, "diag"},           {Algorithm::kCovThresh, "covthresh"},
    {Algorithm::kLbf, "lbf"},
};

std::size_t line_at(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Line of the first occurrence of "key" within `scope`'s object text, or of
// the whole document when the key is absent.
std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const std::size_t pos = text.find(quoted);
  return pos == std::string_view::npos ? 1 : line_at(text, pos);
}

class Fields {
 public:
  Fields(const json& object, std::string_view text, std::string prefix)
      : object_(object), text_(text), prefix_(std::move(prefix)) {
    if (!object_.is_object()) fail(prefix_.empty() ? "config" : prefix_, "expected an object");
  }

  [[noreturn]] void fail(std::string_view key, const std::string& message) const {
    std::ostringstream out;
    out << "config line " << line_of_key(text_, key) << ": '" << name(key) << "' " << message;
    throw ConfigError(out.str());
  }

  bool has(std::string_view key) const {
    used_.insert(std::string(key));
    return object_.contains(std::string(key)) && !object_.at(std::string(key)).is_null();
  }

  const json& raw(std::string_view key) const {
    used_.insert(std::string(key));
    return object_.at(std::string(key));
  }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "must be a number");
    return v.get<double>();
  }

  std::int64_t integer(std::string_view key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "must be an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "must be true or false");
    return v.get<bool>();
  }

  std::string string(std::string_view key) const {
    if (!has(key)) fail(key, "is required");
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) fail(key, "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // Parses a name through `parse`, turning its ConfigError into a located one.
  template <class F>
  auto parsed(std::string_view key, const std::string& value, F&& parse) const {
    try {
      return parse(value);
    } catch (const std::invalid_argument& e) {
      fail(key, std::string("has an invalid value: ") + e.what());
    }
  }

  void reject_unknown() const {
    for (auto it = object_.begin(); it != object_.end(); ++it) {
      if (used_.count(it.key()) == 0) fail(it.key(), "is not a recognised field");
    }
  }

  void mark(std::initializer_list<std::string_view> keys) const {
    for (std::string_view k : keys) used_.insert(std::string(k));
  }

 private:
  std::string name(std::string_view key) const {
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  const json& object_;
  std::string_view text_;
  std::string prefix_;
  mutable std::set<std::string> used_;
};

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", x);
  return buffer;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += sep;
    out += parts[i];
  }
  return out;
}

bool needs_wishart(Algorithm a) { return a == Algorithm::kDiag || a == Algorithm::kCovThresh; }

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [a, name] : kAlgorithmNames) {
    if (a == algorithm) return name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [a, n] : kAlgorithmNames) {
    if (n == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

void SweepConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (d < 1) fail("d must be >= 1");
  if (k < 1 || k > d) fail("k must satisfy 1 <= k <= d");
  if (is_wishart_type(model) && n < 1) fail("n must be >= 1 for wishart-type models");
  if (model == ModelKind::kPlantedVector && !(d > n && n >= 2)) fail("planted-vector needs d > n >= 2");
  if (signals.empty()) fail("signals must be nonempty");
  for (double s : signals) {
    if (!(s >= 0.0) || !std::isfinite(s)) fail("signals must be finite and >= 0");
  }
  if (algorithms.empty()) fail("algorithms must be nonempty");
  if (trials < 1) fail("trials must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) fail("threshold must lie in (0, 1]");
  if (t < 1 || t > k) fail("t must satisfy 1 <= t <= k");
  if (!(delta > 0.0 && delta <= 0.1)) fail("delta must lie in (0, 0.1]");
  if (model == ModelKind::kSymmetric) {
    if (noise_family == NoiseFamily::kCustomSymmetric) fail("custom noise cannot be configured from JSON");
    if (!(noise_scale > 0.0)) fail("noise.scale must be > 0");
  }
  if (adversary) {
    if (model != ModelKind::kWishart && model != ModelKind::kWigner) {
      fail("adversary requires a wishart or wigner model");
    }
    if (!(adversary->strength >= 0.0)) fail("adversary.strength must be >= 0");
  }
  for (Algorithm a : algorithms) {
    const std::string name(to_string(a));
    if (a == Algorithm::kHuber && model != ModelKind::kSymmetric) fail("huber requires the symmetric model");
    if (a != Algorithm::kHuber && model == ModelKind::kSymmetric) fail(name + " does not support the symmetric model");
    if (needs_wishart(a) && !is_wishart_type(model)) fail(name + " requires a wishart-type model");
  }
  if (!(eigen_tol > 0.0) || sdp_iters < 0 || !(sdp_tol > 0.0) || huber_iters < 1 || !(huber_tol > 0.0)) {
    fail("solver tolerances must be > 0 and iteration budgets positive");
  }
  if (!(huber_delta > 0.0 && huber_delta < 0.1)) fail("solver.huber_delta must lie in (0, 0.1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail("solver.alpha must lie in (0, 1]");
  if (!(flatness >= 1.0)) fail("solver.A must be >= 1");
  if (huber_h && !(*huber_h > 0.0)) fail("solver.huber_h must be > 0");
  if (!(cov_c > 0.0)) fail("solver.cov_c must be > 0");
  if (cov_tau && !(*cov_tau >= 0.0)) fail("solver.cov_tau must be >= 0");
  if (r_values) {
    if (r_values->empty()) fail("solver.r_values must be nonempty");
    for (double r : *r_values) {
      if (!(r > 0.0)) fail("solver.r_values must be > 0");
    }
  }
}

SweepConfig parse_sweep_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::ostringstream out;
    out << "config line " << line_at(text, e.byte == 0 ? 0 : e.byte - 1) << ": malformed JSON ("
        << e.what() << ")";
    throw ConfigError(out.str());
  }
  const Fields top(doc, text, "");
  SweepConfig c;
  c.model = top.parsed("model", top.string("model"), parse_model_kind);
  auto require_int = [&](std::string_view key) {
    if (!top.has(key)) top.fail(key, "is required");
    return static_cast<Index>(top.integer(key, 0));
  };
  c.d = require_int("d");
  c.k = require_int("k");
  if (is_wishart_type(c.model)) {
    c.n = require_int("n");
  } else {
    c.n = static_cast<Index>(top.integer("n", 0));
  }
  c.flat = top.boolean("flat", c.flat);

  if (top.has("noise")) {
    const Fields noise(top.raw("noise"), text, "noise");
    if (noise.has("family")) c.noise_family = noise.parsed("family", noise.string("family"), parse_noise_family);
    c.noise_scale = noise.number("scale", c.noise_scale);
    noise.reject_unknown();
  }
  if (top.has("adversary")) {
    const Fields adv(top.raw("adversary"), text, "adversary");
    AdversarySpec spec;
    spec.kind = adv.parsed("kind", adv.string("kind"), parse_adversary_kind);
    if (!adv.has("strength")) adv.fail("strength", "is required");
    spec.strength = adv.number("strength", 0.0);
    adv.reject_unknown();
    c.adversary = spec;
  }

  if (!top.has("signals")) top.fail("signals", "is required");
  c.signals = top.numbers("signals");
  if (!top.has("algorithms")) top.fail("algorithms", "is required");
  const json& algos = top.raw("algorithms");
  if (!algos.is_array()) top.fail("algorithms", "must be an array of names");
  for (const json& a : algos) {
    if (!a.is_string()) top.fail("algorithms", "must be an array of names");
    c.algorithms.push_back(top.parsed("algorithms", a.get<std::string>(), parse_algorithm));
  }
  c.t = static_cast<Index>(top.integer("t", c.t));
  c.delta = top.number("delta", c.delta);
  c.trials = static_cast<Index>(top.integer("trials", c.trials));
  c.seed = top.unsigned_integer("seed", c.seed);
  c.threshold = top.number("threshold", c.threshold);
  c.threads = static_cast<int>(top.integer("threads", 0));
  c.force = top.boolean("force", c.force);

  if (top.has("solver")) {
    const Fields s(top.raw("solver"), text, "solver");
    c.eigen_tol = s.number("eigen_tol", c.eigen_tol);
    c.sdp_iters = static_cast<long>(s.integer("sdp_iters", c.sdp_iters));
    c.sdp_tol = s.number("sdp_tol", c.sdp_tol);
    if (s.has("r_values")) c.r_values = s.numbers("r_values");
    c.huber_iters = static_cast<long>(s.integer("huber_iters", c.huber_iters));
    c.huber_tol = s.number("huber_tol", c.huber_tol);
    c.huber_delta = s.number("huber_delta", c.huber_delta);
    c.alpha = s.number("alpha", c.alpha);
    c.flatness = s.number("A", c.flatness);
    if (s.has("huber_h")) c.huber_h = s.number("huber_h", 0.0);
    c.cov_c = s.number("cov_c", c.cov_c);
    if (s.has("cov_tau")) c.cov_tau = s.number("cov_tau", 0.0);
    s.reject_unknown();
  }
  top.reject_unknown();
  c.validate();
  return c;
}

std::string sweep_config_json(const SweepConfig& c) {
  json algos = json::array();
  for (Algorithm a : c.algorithms) algos.push_back(std::string(to_string(a)));
  json solver = {
      {"eigen_tol", c.eigen_tol},   {"sdp_iters", c.sdp_iters},     {"sdp_tol", c.sdp_tol},
      {"huber_iters", c.huber_iters}, {"huber_tol", c.huber_tol},   {"huber_delta", c.huber_delta},
      {"alpha", c.alpha},           {"A", c.flatness},              {"cov_c", c.cov_c},
  };
  solver["r_values"] = c.r_values ? json(*c.r_values) : json(nullptr);
  solver["huber_h"] = c.huber_h ? json(*c.huber_h) : json(nullptr);
  solver["cov_tau"] = c.cov_tau ? json(*c.cov_tau) : json(nullptr);
  json out = {
      {"model", std::string(to_string(c.model))},
      {"d", c.d},
      {"k", c.k},
      {"n", c.n},
      {"flat", c.flat},
      {"noise", {{"family", std::string(to_string(c.noise_family))}, {"scale", c.noise_scale}}},
      {"signals", c.signals},
      {"algorithms", algos},
      {"t", c.t},
      {"delta", c.delta},
      {"trials", c.trials},
      {"seed", c.seed},
      {"threshold", c.threshold},
      {"force", c.force},
      {"solver", solver},
  };
  out["adversary"] = c.adversary ? json{{"kind", std::string(to_string(c.adversary->kind))},
                                        {"strength", c.adversary->strength}}
                                 : json(nullptr);
  return out.dump();
}

Seed trial_seed(Seed base, std::size_t signal_index, Index trial) {
  return mix_seed(base, {static_cast<std::uint64_t>(signal_index), static_cast<std::uint64_t>(trial)});
}

Instance make_trial_instance(const SweepConfig& c, double signal, Seed seed) {
  const SparseSpike spike = gen_sparse_spike(c.d, c.k, c.flat, sub_seed(seed, "trial.spike"));
  Instance inst;
  switch (c.model) {
    case ModelKind::kWishart:
      inst = gen_wishart(c.n, spike, signal, seed);
      break;
    case ModelKind::kWigner:
      inst = gen_wigner(spike, signal, seed);
      break;
    case ModelKind::kPlantedVector:
      inst = gen_planted_vector(c.n, spike, seed);
      break;
    case ModelKind::kSymmetric:
      inst = gen_symmetric(spike, signal, NoiseSpec{c.noise_family, c.noise_scale, {}}, seed);
      break;
  }
  if (c.adversary) {
    inst = make_adversary(inst, c.adversary->kind, c.adversary->strength,
                          sub_seed(seed, "trial.adversary"));
  }
  return inst;
}

RecoveryResult run_algorithm(Algorithm algorithm, const Instance& inst, const SweepConfig& c,
                             int threads) {
  EigenOptions eigen;
  eigen.tol = c.eigen_tol;
  switch (algorithm) {
    case Algorithm::kEnumerate:
    case Algorithm::kEnumerateRobust: {
      RecoverConfig rc;
      rc.k = c.k;
      rc.t = c.t;
      rc.delta = c.delta;
      rc.mode = algorithm == Algorithm::kEnumerate ? Mode::kClassical : Mode::kRobust;
      rc.threads = threads;
      rc.eigen = eigen;
      rc.sdp.iters = c.sdp_iters;
      rc.sdp.tol = c.sdp_tol;
      rc.r_values = c.r_values;
      rc.force = c.force;
      return recover(inst, rc);
    }
    case Algorithm::kHuber: {
      HuberConfig hc;
      hc.lambda = inst.signal;
      hc.alpha = c.alpha;
      hc.A = c.flatness;
      hc.delta = c.huber_delta;
      hc.h = c.huber_h;
      hc.iters = c.huber_iters;
      hc.tol = c.huber_tol;
      hc.threads = threads;
      hc.force = c.force;
      hc.eigen = eigen;
      return recover_symmetric(inst, c.k, c.t, hc);
    }
    case Algorithm::kPca:
      return vanilla_pca(inst, eigen);
    case Algorithm::kDiag:
      return diagonal_thresholding(inst, c.k, eigen);
    case Algorithm::kCovThresh: {
      const double tau = c.cov_tau ? *c.cov_tau
                                   : default_threshold_level(inst.dim(), c.k, inst.samples(), c.cov_c);
      return covariance_thresholding(inst, c.k, tau, eigen);
    }
    case Algorithm::kLbf:
      return limited_brute_force(inst, c.k, c.t, threads, eigen);
  }
  throw std::logic_error("run_algorithm: unhandled algorithm");
}

SweepResult run_sweep(const SweepConfig& c) {
  c.validate();
  for (Algorithm a : c.algorithms) {
    if (a != Algorithm::kEnumerate && a != Algorithm::kEnumerateRobust) continue;
    RecoverConfig guard;
    guard.k = c.k;
    guard.t = c.t;
    guard.force = c.force;
    const Index grid_n = is_wishart_type(c.model) ? c.n : c.d;
    check_budget(c.d, guard, c.r_values ? c.r_values->size() : r_grid(grid_n).size());
  }
  if (c.algorithms.size() > 0 && c.model == ModelKind::kSymmetric && !c.force && c.t > 4) {
    throw ConfigError("config: t exceeds the order guard 4; set force to run anyway");
  }

  const std::size_t n_alg = c.algorithms.size();
  const std::size_t n_sig = c.signals.size();
  const auto n_trials = static_cast<std::size_t>(c.trials);
  std::vector<SweepRow> rows(n_alg * n_sig * n_trials);

  parallel_chunks(n_sig * n_trials, 1, resolve_threads(c.threads),
                  [&](std::uint64_t task, std::uint64_t, std::uint64_t) {
                    const std::size_t g = static_cast<std::size_t>(task) / n_trials;
                    const auto i = static_cast<Index>(static_cast<std::size_t>(task) % n_trials);
                    const Seed seed = trial_seed(c.seed, g, i);
                    std::optional<Instance> inst;
                    std::string instance_error;
                    try {
                      inst = make_trial_instance(c, c.signals[g], seed);
                    } catch (const std::exception& e) {
                      instance_error = e.what();
                    }
                    for (std::size_t a = 0; a < n_alg; ++a) {
                      SweepRow& row = rows[(a * n_sig + g) * n_trials + static_cast<std::size_t>(i)];
                      row.algorithm = c.algorithms[a];
                      row.signal_index = g;
                      row.signal = c.signals[g];
                      row.trial = i;
                      row.seed = seed;
                      row.correlation = std::nan("");
                      if (!inst) {
                        row.error = "instance: " + instance_error;
                        continue;
                      }
                      row.realized_signal = inst->signal;
                      try {
                        const RecoveryResult r = run_algorithm(c.algorithms[a], *inst, c, 1);
                        row.correlation = r.correlation.value_or(std::nan(""));
                        row.success = r.correlation && *r.correlation >= c.threshold;
                        row.wall_time = r.wall_time;
                        row.patterns = r.patterns_enumerated;
                        row.flags = join(r.flags, ';');
                      } catch (const std::exception& e) {
                        row.error = e.what();
                      }
                    }
                  });

  SweepResult out;
  out.summary = summarize(rows, c.threshold);
  out.rows = std::move(rows);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows, double threshold) {
  std::vector<SummaryRow> out;
  std::map<std::pair<int, std::size_t>, std::size_t> slot;
  for (const SweepRow& r : rows) {
    const auto key = std::make_pair(static_cast<int>(r.algorithm), r.signal_index);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back({r.algorithm, r.signal, 0, 0, 0});
    }
    SummaryRow& s = out[it->second];
    ++s.trials;
    if (!r.error.empty()) ++s.errors;
    if (r.error.empty() && r.correlation >= threshold) ++s.successes;
  }
  return out;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRow>& rows,
               bool timing) {
  out << "# sparse_spike sweep csv v1\r\n";
  out << "# config: " << sweep_config_json(config) << "\r\n";
  out << "algorithm,signal,trial,seed,realized_signal,correlation,success,patterns,flags,error";
  if (timing) out << ",wall_time";
  out << "\r\n";
  for (const SweepRow& r : rows) {
    out << csv_field(to_string(r.algorithm)) << ',' << format_double(r.signal) << ',' << r.trial
        << ',' << r.seed << ',' << format_double(r.realized_signal) << ','
        << format_double(r.correlation) << ',' << (r.success ? 1 : 0) << ',' << r.patterns << ','
        << csv_field(r.flags) << ',' << csv_field(r.error);
    if (timing) out << ',' << format_double(r.wall_time);
    out << "\r\n";
  }
}

void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& summary) {
  json rows = json::array();
  for (const SummaryRow& s : summary) {
    rows.push_back({{"algorithm", std::string(to_string(s.algorithm))},
                    {"signal", s.signal},
                    {"successes", s.successes},
                    {"trials", s.trials},
                    {"errors", s.errors},
                    {"success_rate", s.rate()}});
  }
  out << rows.dump(2) << '\n';
}

std::string result_json(const RecoveryResult& r) {
  json out = {
      {"algorithm", r.algorithm},
      {"estimate", std::vector<double>(r.estimate.data(), r.estimate.data() + r.estimate.size())},
      {"patterns_enumerated", r.patterns_enumerated},
      {"candidates_evaluated", r.candidates_evaluated},
      {"eigenproblems", r.eigenproblems},
      {"wall_time", r.wall_time},
      {"flags", r.flags},
  };
  out["correlation"] = r.correlation ? json(*r.correlation) : json(nullptr);
  out["score"] = r.score ? json(*r.score) : json(nullptr);
  return out.dump(2);
}

std::vector<BenchRow> run_bench(Index d, Index n, Index k, Index max_t, double beta, Seed seed,
                                int threads, bool force) {
  if (!(max_t >= 1 && max_t <= k && k <= d) || n < 1) {
    throw ConfigError("bench: need 1 <= t <= k <= d and n >= 1");
  }
  const SparseSpike spike = gen_sparse_spike(d, k, true, sub_seed(seed, "bench.spike"));
  const Instance inst = gen_wishart(n, spike, beta, seed);
  std::vector<BenchRow> rows;
  for (Index t = 1; t <= max_t; ++t) {
    RecoverConfig rc;
    rc.k = k;
    rc.t = t;
    rc.threads = threads;
    rc.force = force;
    const RecoveryResult r = recover(inst, rc);
    rows.push_back({t, r.patterns_enumerated, r_grid(n).size(), r.eigenproblems, r.wall_time,
                    r.correlation.value_or(0.0)});
  }
  return rows;
}

}  // namespace sparse_spike
