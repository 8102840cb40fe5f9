#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memlogic/logic_1t1r.hpp"

namespace memlogic {

/// Scouting reference currents in amperes. XOR uses the OR and AND
/// references as the lower and upper edge of its window.
struct ReferenceSet {
  double i_read = 0.0;
  double i_or = 0.0;
  double i_and = 0.0;

  double i_xor1() const { return i_or; }
  double i_xor2() const { return i_and; }
  void validate() const;
  bool operator==(const ReferenceSet&) const = default;

  /// 7.25 / 11.55 / 32.74 uA, the references used on the measured devices.
  static ReferenceSet measured_refs();
};

enum class ScoutOp { Read, And, Or, Xor };

std::string_view to_string(ScoutOp op);
ScoutOp parse_scout_op(std::string_view s);  // case-insensitive

/// Expected logical result for an input class ("0"/"1" for READ, two bits otherwise).
bool scout_truth(ScoutOp op, std::string_view input_class);

/// A measured current. `input_class` lists cell bits in address order;
/// single-cell reads carry a one-character class.
struct CurrentSample {
  std::string input_class;
  double current = 0.0;
  std::size_t cycle = 0;
};

void write_inputs(MemoryArray& array, std::span<const CellAddress> addrs,
                  const std::vector<bool>& bits, const LogicVoltages& v, Rng& rng);

/// Total current of a simultaneous read of the selected cells. Throws
/// std::invalid_argument if the cells cannot be selected in parallel.
double scout_current(const MemoryArray& array, std::span<const CellAddress> addrs, Rng& rng,
                     double v_read = 0.1, double v_wl = 3.0);

/// Extremes of two adjacent current classes; `upper_min > lower_max` means the
/// classes are separable.
struct Gap {
  std::string name;
  double lower_max = 0.0;
  double upper_min = 0.0;

  bool open() const { return upper_min > lower_max; }
  double width() const { return upper_min - lower_max; }
  double midpoint() const { return 0.5 * (upper_min + lower_max); }
  /// Gap width relative to its midpoint.
  double margin() const { return width() / midpoint(); }
  bool contains(double current) const { return current > lower_max && current < upper_min; }
};

class OverlapError : public std::runtime_error {
 public:
  explicit OverlapError(Gap gap);
  const Gap& gap() const { return gap_; }

 private:
  Gap gap_;
};

/// Gaps read (single HRS vs single LRS), or (00 vs 01 and 10) and
/// and (01 and 10 vs 11). `read` is empty when no single-cell samples exist.
struct ClassGaps {
  std::optional<Gap> read;
  Gap or_gap;
  Gap and_gap;
};

/// Throws std::invalid_argument if a required class has no samples.
ClassGaps measure_gaps(std::span<const CurrentSample> samples);

/// Midpoint references. Without single-cell samples i_read is half the OR
/// midpoint. Throws OverlapError for the first closed gap.
ReferenceSet place_references(std::span<const CurrentSample> samples);
ReferenceSet references_from_gaps(const ClassGaps& gaps);

/// Strict comparisons; a current equal to a reference maps to 0.
bool classify(double current, const ReferenceSet& refs, ScoutOp op);

/// write_inputs, scout_current and classify. READ takes one address.
bool scouting_gate(MemoryArray& array, std::span<const CellAddress> addrs,
                   const std::vector<bool>& bits, ScoutOp op, const ReferenceSet& refs,
                   const LogicVoltages& v, Rng& rng);

/// Gaps between adjacent popcount classes; `by_popcount[k]` holds the
/// currents with k cells in LRS.
std::vector<Gap> popcount_gaps(const std::vector<std::vector<double>>& by_popcount);

/// The n thresholds separating n+1 popcount classes. Throws OverlapError
/// naming the first colliding pair.
std::vector<double> extend_n_inputs(std::size_t n, const std::vector<std::vector<double>>& by_popcount);

}  // namespace memlogic
