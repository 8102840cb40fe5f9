#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memlogic/device.hpp"

namespace memlogic {

/// Standard1T1R: WL per row, SL and BL per column (column-wise SL/BL pair).
/// PseudoCrossbar: WL and BL per row, SL per column, so cells sharing a row
/// can be driven in parallel with different TE voltages.
enum class TopologyKind { Standard1T1R, PseudoCrossbar };

std::string_view to_string(TopologyKind k);
TopologyKind parse_topology_kind(std::string_view s);

struct ArrayTopology {
  TopologyKind kind = TopologyKind::Standard1T1R;
  std::size_t rows = 8;
  std::size_t cols = 8;

  void validate() const;
  std::size_t size() const { return rows * cols; }
  std::size_t sl_count() const { return cols; }
  std::size_t bl_count() const { return kind == TopologyKind::Standard1T1R ? cols : rows; }
};

struct CellAddress {
  std::size_t row = 0;
  std::size_t col = 0;
  auto operator<=>(const CellAddress&) const = default;
};

std::string to_string(const CellAddress& a);

/// Voltages on the array lines for one pulse; unlisted lines sit at 0 V.
struct LineDrive {
  std::map<std::size_t, double> wl;
  std::map<std::size_t, double> sl;
  std::map<std::size_t, double> bl;
  double width = 1.0e-6;

  void validate(const ArrayTopology& topology) const;
};

struct ResolvedPulse {
  CellAddress addr;
  Pulse pulse;
};

/// Pulse seen by every cell of the array, in row-major address order.
std::vector<ResolvedPulse> resolve_drives(const ArrayTopology& topology, const LineDrive& drive);

/// The line drive that delivers `pulse` to `addr` and holds every other line at 0 V.
LineDrive single_cell_drive(const ArrayTopology& topology, const CellAddress& addr,
                            const Pulse& pulse);

struct ParallelCheck {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

/// Whether two cells can be connected in parallel while receiving the two
/// requested pulses at the same time.
ParallelCheck check_parallel_distinct_voltages(const ArrayTopology& topology,
                                               const CellAddress& a, const CellAddress& b,
                                               const Pulse& pulse_a, const Pulse& pulse_b);

class MemoryArray {
 public:
  MemoryArray(ArrayTopology topology, DeviceModel model, std::vector<MemristorCell> cells);

  const ArrayTopology& topology() const { return topology_; }
  const DeviceModel& model() const { return model_; }
  const MemristorCell& cell(const CellAddress& a) const { return cells_.at(index(a)); }
  MemristorCell& cell(const CellAddress& a) { return cells_.at(index(a)); }
  const std::vector<MemristorCell>& cells() const { return cells_; }
  CellAddress address_of(std::size_t linear) const;

 private:
  std::size_t index(const CellAddress& a) const;

  ArrayTopology topology_;
  DeviceModel model_;
  std::vector<MemristorCell> cells_;
};

/// Array of pristine cells sampled from the model.
MemoryArray make_array(const ArrayTopology& topology, const DeviceModel& model, Rng& rng);

/// Forms every cell with the default forming ramp.
void form_array(MemoryArray& array, Rng& rng, const FormingRamp& ramp = {});

/// Device-level drive error tagged with the cell it occurred on.
class ArrayDriveError : public std::runtime_error {
 public:
  ArrayDriveError(CellAddress addr, const std::string& what)
      : std::runtime_error(to_string(addr) + ": " + what), addr_(addr) {}
  const CellAddress& address() const { return addr_; }

 private:
  CellAddress addr_;
};

struct DriveEvent {
  CellAddress addr;
  SwitchEvent event = SwitchEvent::None;
};

/// Pulses every cell; events are reported for cells whose transistor
/// conducts, in address order. Drives are checked for every cell before any
/// cell changes, so a failing drive leaves the array untouched.
std::vector<DriveEvent> apply_drive(MemoryArray& array, const LineDrive& drive, Rng& rng);

}  // namespace memlogic
