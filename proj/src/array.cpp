#include "memlogic/array.hpp"

#include <cmath>
#include <utility>

namespace memlogic {

namespace {

double line_voltage(const std::map<std::size_t, double>& lines, std::size_t idx) {
  auto it = lines.find(idx);
  return it == lines.end() ? 0.0 : it->second;
}

void check_indices(const std::map<std::size_t, double>& lines, std::size_t count,
                   const char* name) {
  for (const auto& [idx, v] : lines) {
    if (idx >= count) {
      throw std::out_of_range(std::string(name) + " index " + std::to_string(idx) +
                              " out of range (" + std::to_string(count) + " lines)");
    }
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " voltage not finite");
  }
}

std::size_t bl_index(const ArrayTopology& t, const CellAddress& a) {
  return t.kind == TopologyKind::Standard1T1R ? a.col : a.row;
}

}  // namespace

std::string_view to_string(TopologyKind k) {
  return k == TopologyKind::Standard1T1R ? "standard-1t1r" : "pseudo-crossbar";
}

TopologyKind parse_topology_kind(std::string_view s) {
  if (s == "standard-1t1r" || s == "Standard1T1R") return TopologyKind::Standard1T1R;
  if (s == "pseudo-crossbar" || s == "PseudoCrossbar") return TopologyKind::PseudoCrossbar;
  throw std::invalid_argument("unknown topology '" + std::string(s) +
                              "' (available: standard-1t1r, pseudo-crossbar)");
}

void ArrayTopology::validate() const {
  if (rows < 1 || cols < 1) throw std::invalid_argument("array needs at least one row and column");
}

std::string to_string(const CellAddress& a) {
  return "(" + std::to_string(a.row) + "," + std::to_string(a.col) + ")";
}

void LineDrive::validate(const ArrayTopology& topology) const {
  check_indices(wl, topology.rows, "WL");
  check_indices(sl, topology.sl_count(), "SL");
  check_indices(bl, topology.bl_count(), "BL");
  if (!(width > 0.0)) throw std::invalid_argument("drive width must be > 0");
}

std::vector<ResolvedPulse> resolve_drives(const ArrayTopology& topology, const LineDrive& drive) {
  topology.validate();
  drive.validate(topology);
  std::vector<ResolvedPulse> out;
  out.reserve(topology.size());
  for (std::size_t r = 0; r < topology.rows; ++r) {
    for (std::size_t c = 0; c < topology.cols; ++c) {
      CellAddress a{r, c};
      out.push_back({a, Pulse{line_voltage(drive.sl, c), line_voltage(drive.bl, bl_index(topology, a)),
                              line_voltage(drive.wl, r), drive.width}});
    }
  }
  return out;
}

LineDrive single_cell_drive(const ArrayTopology& topology, const CellAddress& addr,
                            const Pulse& pulse) {
  LineDrive d;
  d.width = pulse.width;
  if (pulse.v_g != 0.0) d.wl[addr.row] = pulse.v_g;
  if (pulse.v_te != 0.0) d.sl[addr.col] = pulse.v_te;
  if (pulse.v_be != 0.0) d.bl[bl_index(topology, addr)] = pulse.v_be;
  return d;
}

ParallelCheck check_parallel_distinct_voltages(const ArrayTopology& topology,
                                               const CellAddress& a, const CellAddress& b,
                                               const Pulse& pulse_a, const Pulse& pulse_b) {
  if (a == b) return {false, "the two cells must be distinct"};
  if (pulse_a.width != pulse_b.width) return {false, "simultaneous pulses must share one width"};
  if (topology.kind == TopologyKind::Standard1T1R) {
    if (a.col != b.col) {
      return {false, "standard 1T1R cells connect in parallel only through a shared SL/BL column"};
    }
    if (pulse_a.v_te != pulse_b.v_te || pulse_a.v_be != pulse_b.v_be) {
      return {false, "cells on one SL/BL column cannot receive different TE/BE voltages"};
    }
    return {};
  }
  if (a.row != b.row) {
    return {false, "pseudo-crossbar cells connect in parallel only through a shared WL/BL row"};
  }
  if (pulse_a.v_be != pulse_b.v_be || pulse_a.v_g != pulse_b.v_g) {
    return {false, "cells on one WL/BL row cannot receive different BE or gate voltages"};
  }
  return {};
}

MemoryArray::MemoryArray(ArrayTopology topology, DeviceModel model, std::vector<MemristorCell> cells)
    : topology_(topology), model_(std::move(model)), cells_(std::move(cells)) {
  topology_.validate();
  if (cells_.size() != topology_.size()) {
    throw std::invalid_argument("cell count does not match array topology");
  }
}

std::size_t MemoryArray::index(const CellAddress& a) const {
  if (a.row >= topology_.rows || a.col >= topology_.cols) {
    throw std::out_of_range("cell address " + to_string(a) + " outside array");
  }
  return a.row * topology_.cols + a.col;
}

CellAddress MemoryArray::address_of(std::size_t linear) const {
  return {linear / topology_.cols, linear % topology_.cols};
}

MemoryArray make_array(const ArrayTopology& topology, const DeviceModel& model, Rng& rng) {
  topology.validate();
  model.variability.validate();
  model.transistor.validate();
  std::vector<MemristorCell> cells;
  cells.reserve(topology.size());
  for (std::size_t i = 0; i < topology.size(); ++i) {
    cells.push_back(sample_fresh_cell(model.variability, rng, i));
  }
  return MemoryArray(topology, model, std::move(cells));
}

void form_array(MemoryArray& array, Rng& rng, const FormingRamp& ramp) {
  for (std::size_t i = 0; i < array.topology().size(); ++i) {
    auto a = array.address_of(i);
    array.cell(a) = form_with_ramp(array.cell(a), array.model(), rng, ramp).cell;
  }
}

std::vector<DriveEvent> apply_drive(MemoryArray& array, const LineDrive& drive, Rng& rng) {
  auto pulses = resolve_drives(array.topology(), drive);
  const auto& transistor = array.model().transistor;
  for (const auto& rp : pulses) {
    try {
      check_drive(array.cell(rp.addr), rp.pulse, transistor);
    } catch (const InvalidDrive& e) {
      throw ArrayDriveError(rp.addr, e.what());
    }
  }
  std::vector<DriveEvent> events;
  for (const auto& rp : pulses) {
    auto outcome = apply_pulse(array.cell(rp.addr), rp.pulse, array.model(), rng);
    array.cell(rp.addr) = outcome.cell;
    if (transistor.conducts(rp.pulse.v_g)) events.push_back({rp.addr, outcome.event});
  }
  return events;
}

}  // namespace memlogic
