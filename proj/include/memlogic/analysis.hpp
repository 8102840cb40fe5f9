#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlogic/scouting.hpp"

namespace memlogic {

/// Nearest-rank summary of one sample population.
struct DistributionSummary {
  std::string label;
  std::size_t count = 0;
  double min = 0.0;
  double p1 = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double log_sd = 0.0;  // sample std-dev of ln(x); 0 for a single sample

  bool operator==(const DistributionSummary&) const = default;
};

/// Throws std::invalid_argument for an empty sample set.
DistributionSummary summarize(std::string label, std::span<const double> samples);

/// Nearest-rank quantile of sorted data: element ceil(p * n), 1-based, p = 0 -> first.
double nearest_rank(std::span<const double> sorted, double p);

struct FailureBucket {
  std::string group;  // gate or scouting op
  std::string combo;  // input combination, e.g. "01"
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::size_t errors = 0;  // trials that could not run (initialization failures)

  double failure_rate() const { return trials ? double(failures) / double(trials) : 0.0; }
};

struct FirstFailure {
  std::string group;
  std::string combo;
  std::size_t cycle = 0;
  std::uint64_t stream_seed = 0;  // Rng seed of the failing trial
};

struct FailureReport {
  std::vector<FailureBucket> buckets;
  std::optional<FirstFailure> first_failure;

  std::size_t trials() const;
  std::size_t failures() const;
  std::size_t errors() const;
  double overall_rate() const;
  const FailureBucket* find(std::string_view group, std::string_view combo) const;
};

enum class RefMode { Split, InSample };
enum class RefSource { Placed, Measured };

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t cycles = 100;
  std::vector<ParamMapping> gates = {builtin_mapping("OR"), builtin_mapping("AND"),
                                     builtin_mapping("NIMP"), builtin_mapping("XOR")};
  std::vector<ScoutOp> ops = {ScoutOp::Read, ScoutOp::And, ScoutOp::Or, ScoutOp::Xor};
  DeviceModel device;
  ArrayTopology topology;
  LogicVoltages voltages;
  RefMode ref_mode = RefMode::Split;
  RefSource ref_source = RefSource::Placed;
  bool rotate_cells = false;  // one cell per gate unless set; then cycle k uses cell k mod size
  std::size_t threads = 1;    // 0 selects the hardware concurrency

  void validate() const;
};

struct ExperimentError {
  std::string group;
  std::string combo;
  std::size_t cycle = 0;
  std::string message;
};

struct LogicExperimentResult {
  std::vector<GateTrace> traces;  // gate, then combo (00, 01, 10, 11), then cycle
  std::vector<DistributionSummary> summaries;
  FailureReport report;
  std::vector<ExperimentError> errors;
};

/// Every gate runs a 100-cycle cascade per input combination on its own
/// array. Trials draw from streams keyed by (seed, gate, combo, cycle), so the
/// result does not depend on `threads`.
LogicExperimentResult run_1t1r_experiment(const ExperimentConfig& config);

struct ScoutingExperimentResult {
  std::vector<CurrentSample> samples;  // cycle, then class; READ samples follow their pair sample
  ReferenceSet refs;
  RefSource ref_source = RefSource::Placed;
  ClassGaps training_gaps;  // gaps the references were placed in (when placed)
  ClassGaps gaps;           // gaps over all samples
  std::vector<std::string> overlapping_gaps;
  std::vector<DistributionSummary> summaries;
  FailureReport report;
  std::vector<ExperimentError> errors;

  /// Whether each reference lies strictly inside its gap over all samples.
  bool refs_inside_gaps() const;
};

/// Two parallel cells; cycles run the classes 00, 01, 10, 11 in order with
/// on-mismatch rewrites. With RefMode::Split and placed references the first
/// half of the cycles places the references and the second half is classified.
ScoutingExperimentResult run_scouting_experiment(const ExperimentConfig& config);

struct NInputResult {
  std::size_t n = 0;
  std::vector<std::vector<double>> by_popcount;
  std::vector<Gap> gaps;
  std::vector<double> thresholds;  // empty on overlap
  std::optional<Gap> overlap;      // first colliding popcount pair
  std::size_t write_errors = 0;    // combinations skipped because a cell could not be initialized
};

/// `config.cycles` parallel reads of every n-cell input combination.
NInputResult run_n_input_scouting(const ExperimentConfig& config, std::size_t n);

struct NonSwitchingCase {
  int case_id = 0;
  std::size_t count = 0;
  std::size_t binary_changes = 0;
  std::size_t state_changes = 0;  // noise-free resistance changed by the logic pulse
  std::optional<DistributionSummary> init;
  std::optional<DistributionSummary> final;
  double variation = 0.0;  // sample std-dev of final / init - 1 over the trials
};

std::vector<NonSwitchingCase> non_switching_report(std::span<const GateTrace> traces);

inline constexpr std::array<int, 7> kNonSwitchingCases = {3, 6, 7, 8, 12, 13, 16};

struct CharacterizationRow {
  std::size_t cell = 0;
  std::size_t cycle = 0;
  double r_lrs = 0.0;
  double r_hrs = 0.0;
};

struct CharacterizationResult {
  std::vector<CharacterizationRow> rows;
  std::vector<DistributionSummary> summaries;  // LRS, HRS, then per cell
  std::size_t switch_failures = 0;
  double mean_ratio = 0.0;        // mean(HRS) / mean(LRS)
  double mean_cycle_ratio = 0.0;  // mean of per-cycle HRS/LRS
};

/// RESET/read/SET/read cycles on independently sampled cells.
CharacterizationResult characterize(const ExperimentConfig& config, std::size_t cells);

struct SweepPoint {
  double value = 0.0;
  FailureReport logic;
  FailureReport scouting;
  std::optional<double> or_margin;   // measured, over all samples
  std::optional<double> and_margin;
  double ideal_or_margin = 0.0;      // noise-free class currents at the swept medians
  double ideal_and_margin = 0.0;
  double ideal_xor_window = 0.0;     // A, I_and - I_or for noise-free midpoint refs
};

/// Sweeps one device parameter (any VariabilityParams field or
/// `hrs_lrs_ratio`) and reruns both experiments at each value.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                  std::span<const double> values);

/// Noise-free two-cell class currents 00, 01 and 11 at the model medians.
std::array<double, 3> ideal_pair_currents(const VariabilityParams& p, double v_read);

}  // namespace memlogic
