#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_spike/model.hpp"
#include "sparse_spike/result.hpp"

namespace sparse_spike {

enum class Algorithm { kEnumerate, kEnumerateRobust, kHuber, kPca, kDiag, kCovThresh, kLbf };

std::string_view to_string(Algorithm algorithm);
/// Throws ConfigError for unknown names.
Algorithm parse_algorithm(std::string_view name);

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::kSignalErasing;
  double strength = 0.0;
};

/// Monte-Carlo sweep description. Every field has a default except model,
/// d, k, signals and algorithms; n is required for wishart-type models.
struct SweepConfig {
  ModelKind model = ModelKind::kWishart;
  Index d = 0;
  Index k = 0;
  Index n = 0;
  bool flat = true;
  NoiseFamily noise_family = NoiseFamily::kCauchy;  // symmetric model
  double noise_scale = 1.0;
  std::optional<AdversarySpec> adversary;

  std::vector<double> signals;
  std::vector<Algorithm> algorithms;
  Index t = 1;
  double delta = 0.1;
  Index trials = 1;
  Seed seed = 0;
  double threshold = 0.9;  // success when correlation >= threshold
  int threads = 0;         // not part of the echoed configuration

  // Solver knobs.
  double eigen_tol = 1e-9;
  long sdp_iters = 2000;
  double sdp_tol = 1e-3;
  std::optional<std::vector<double>> r_values;
  long huber_iters = 400;
  double huber_tol = 1e-4;
  double huber_delta = 0.05;
  double alpha = 0.5;
  double flatness = 1.5;  // A
  std::optional<double> huber_h;
  double cov_c = 4.0;
  std::optional<double> cov_tau;
  bool force = false;

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Parses and validates a JSON configuration. Errors carry "line N" of the
/// offending text.
SweepConfig parse_sweep_config(std::string_view text);

/// Canonical JSON of the resolved configuration (defaults filled in,
/// threads omitted), on one line.
std::string sweep_config_json(const SweepConfig& config);

struct SweepRow {
  Algorithm algorithm = Algorithm::kPca;
  std::size_t signal_index = 0;
  double signal = 0.0;
  double realized_signal = 0.0;
  Index trial = 0;
  Seed seed = 0;
  double correlation = 0.0;  // NaN when the trial failed
  bool success = false;
  double wall_time = 0.0;
  std::uint64_t patterns = 0;
  std::string flags;  // ';'-joined
  std::string error;  // empty on success
};

struct SummaryRow {
  Algorithm algorithm = Algorithm::kPca;
  double signal = 0.0;
  Index successes = 0;
  Index trials = 0;
  Index errors = 0;
  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials); }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SummaryRow> summary;
};

/// Instance seed of trial i at signal index g: mix_seed(base, {g, i}).
/// Algorithms are deterministic and are compared on the same instances, so
/// the algorithm index is not mixed in.
Seed trial_seed(Seed base, std::size_t signal_index, Index trial);

Instance make_trial_instance(const SweepConfig& config, double signal, Seed seed);

/// Runs one algorithm with the configuration's knobs.
RecoveryResult run_algorithm(Algorithm algorithm, const Instance& inst, const SweepConfig& config,
                             int threads);

/// Rows ordered by (algorithm, signal, trial). Trials run in parallel; a
/// failing trial becomes a row with its error text.
SweepResult run_sweep(const SweepConfig& config);

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows, double threshold);

/// First line "# sparse_spike sweep csv v1", second "# config: <json>", then
/// the header and one RFC-4180 row per SweepRow. wall_time is appended only
/// when `timing` is set, which keeps default output byte-reproducible.
void write_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRow>& rows,
               bool timing = false);

void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& summary);

/// RFC-4180 field quoting.
std::string csv_field(std::string_view text);

/// RecoveryResult as a JSON object.
std::string result_json(const RecoveryResult& result);

struct BenchRow {
  Index t = 0;
  std::uint64_t patterns = 0;
  std::size_t grid = 0;
  std::uint64_t eigenproblems = 0;
  double wall_time = 0.0;
  double correlation = 0.0;
};

/// Times classical enumeration on one wishart instance for t = 1..max_t.
std::vector<BenchRow> run_bench(Index d, Index n, Index k, Index max_t, double beta, Seed seed,
                                int threads, bool force);

}  // namespace sparse_spike
