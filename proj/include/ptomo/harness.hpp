#ifndef PTOMO_HARNESS_HPP
#define PTOMO_HARNESS_HPP

#include "ptomo/lowerbound.hpp"
#include "ptomo/measurement.hpp"
#include "ptomo/qstate.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ptomo {

enum class ExperimentKind { Tomo, Overlap, LowerBound, Oracle };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

/// Experiment description. Every field has a key in the flat `key = value`
/// config format; see ExperimentConfig::set for the key list.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Tomo;
  std::optional<StateSpec> state;  // default: maximally mixed on n qubits
  std::optional<int> n;            // default: state's qubit count, else 2
  int k = 2;
  double epsilon = 0.2;
  double delta = 0.1;
  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  std::string out;  // output directory; empty writes nothing

  std::optional<std::int64_t> shots_per_basis;  // tomo: override m
  std::optional<std::int64_t> total_shots;      // overlap: override T
  std::vector<Subset> subsets;                  // overlap partial mode, oracle marginals
  std::vector<MeasurementBasis> bases;          // oracle distributions
  std::optional<std::int64_t> samples;          // lowerbound: copies per trial
  std::vector<int> n_list;                      // lowerbound: run the scaling table

  bool project_to_physical = false;
  bool save_shots = false;
  bool save_estimates = false;
  bool include_smaller = false;
  bool record_timing = false;
  int workers = 0;  // 0: hardware concurrency

  /// Keys: kind, state, n, k, epsilon, delta, trials, seed, out,
  /// shots_per_basis, total_shots, subsets ("0,1;2,3"), bases ("XY,ZZ"),
  /// samples, n_list ("1,2,4"), project_to_physical, save_shots,
  /// save_estimates, include_smaller, record_timing, workers.
  void set(std::string_view key, std::string_view value);

  /// Reads `key = value` lines; `#` starts a comment.
  static ExperimentConfig parse(std::istream& is);
  static ExperimentConfig load(const std::string& path);

  int qubits() const;
  StateSpec resolved_state() const;

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;

  /// Sorted key=value lines of every result-affecting field except the seed.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

struct TrialRecord {
  std::int64_t trial = 0;
  bool success = false;
  std::int64_t shots = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::optional<double> wall_time_s;
};

struct MetricSummary {
  std::string name;
  std::int64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct ExperimentSummary {
  std::string kind;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  double success_rate = 0.0;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  std::vector<MetricSummary> metrics;
};

struct ExperimentResult {
  ExperimentSummary summary;
  std::vector<TrialRecord> records;
  std::vector<ScalingRow> scaling;
  nlohmann::ordered_json oracle;
};

/// Relative frequency of each symbol in [0, alphabet_size); alphabet_size 0
/// means max(samples) + 1. Throws on empty input.
RealVector empirical_distribution(std::span<const int> samples, int alphabet_size = 0);

/// 95% Wilson score interval.
std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

ExperimentSummary summarize(std::string_view kind, const std::string& config_hash, std::uint64_t seed,
                            std::span<const TrialRecord> records);

/// Runs the configured experiment. Trial i draws from Rng::substream(seed, i),
/// so results do not depend on the worker count. When config.out is set,
/// writes trials.jsonl and summary.csv there (plus shots/, estimates/,
/// scaling.csv or oracle.json as configured).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Exact expectations (n <= 6), marginals for `subsets`, and outcome
/// distributions for `bases`.
nlohmann::ordered_json oracle_report(const StateSpec& spec, std::span<const Subset> subsets,
                                     std::span<const MeasurementBasis> bases);

nlohmann::ordered_json matrix_to_json(ConstMatrixRef m);
nlohmann::ordered_json to_json(const TrialRecord& r, std::string_view kind, const std::string& config_hash,
                               std::uint64_t seed);

void write_trials_jsonl(std::ostream& os, std::span<const TrialRecord> records, std::string_view kind,
                        const std::string& config_hash, std::uint64_t seed);
void write_summary_csv(std::ostream& os, const ExperimentSummary& s);
void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows);

/// Re-aggregates a trials.jsonl stream.
ExperimentSummary report_from_jsonl(std::istream& is);

}  // namespace ptomo

#endif  // PTOMO_HARNESS_HPP
