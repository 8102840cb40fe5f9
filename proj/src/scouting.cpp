#include "memlogic/scouting.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <limits>
#include <set>

namespace memlogic {

namespace {

struct Extremes {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double x) {
    min = std::min(min, x);
    max = std::max(max, x);
    ++count;
  }
};

std::string format_ua(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g uA", a * 1e6);
  return buf;
}

}  // namespace

void ReferenceSet::validate() const {
  if (!(i_read > 0.0)) throw std::invalid_argument("i_read must be > 0");
  if (!(i_or < i_and)) throw std::invalid_argument("i_or must be below i_and");
}

ReferenceSet ReferenceSet::measured_refs() { return {7.25e-6, 11.55e-6, 32.74e-6}; }

std::string_view to_string(ScoutOp op) {
  switch (op) {
    case ScoutOp::Read: return "READ";
    case ScoutOp::And: return "AND";
    case ScoutOp::Or: return "OR";
    case ScoutOp::Xor: return "XOR";
  }
  return "?";
}

ScoutOp parse_scout_op(std::string_view s) {
  std::string u(s);
  for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "READ") return ScoutOp::Read;
  if (u == "AND") return ScoutOp::And;
  if (u == "OR") return ScoutOp::Or;
  if (u == "XOR") return ScoutOp::Xor;
  throw std::invalid_argument("unknown scouting op '" + std::string(s) +
                              "' (available: read, and, or, xor)");
}

bool scout_truth(ScoutOp op, std::string_view cls) {
  if (op == ScoutOp::Read) {
    if (cls.size() != 1) throw std::invalid_argument("READ takes a single-cell class");
    return cls[0] == '1';
  }
  if (cls.size() != 2) throw std::invalid_argument("two-input scouting ops take a two-cell class");
  const bool a = cls[0] == '1';
  const bool b = cls[1] == '1';
  switch (op) {
    case ScoutOp::And: return a && b;
    case ScoutOp::Or: return a || b;
    case ScoutOp::Xor: return a != b;
    default: return false;
  }
}

void write_inputs(MemoryArray& array, std::span<const CellAddress> addrs,
                  const std::vector<bool>& bits, const LogicVoltages& v, Rng& rng) {
  if (addrs.size() != bits.size()) {
    throw std::invalid_argument("write_inputs: address and bit counts differ");
  }
  for (std::size_t k = 0; k < addrs.size(); ++k) initialize_cell(array, addrs[k], bits[k], v, rng);
}

double scout_current(const MemoryArray& array, std::span<const CellAddress> addrs, Rng& rng,
                     double v_read, double v_wl) {
  if (addrs.empty()) throw std::invalid_argument("scout_current needs at least one cell");
  const auto& topo = array.topology();
  const Pulse read{v_read, 0.0, v_wl, 1.0e-6};
  std::set<CellAddress> seen;
  for (const auto& a : addrs) {
    if (!seen.insert(a).second) throw std::invalid_argument("scout_current: duplicate cell " + to_string(a));
    auto ok = check_parallel_distinct_voltages(topo, addrs.front(), a, read, read);
    if (a != addrs.front() && !ok) {
      throw std::invalid_argument("cells " + to_string(addrs.front()) + " and " + to_string(a) +
                                  " cannot be read in parallel: " + ok.reason);
    }
  }
  if (v_read == 0.0) return 0.0;
  const auto& model = array.model();
  const double i_limit = model.transistor.saturation_current(v_wl);
  double total = 0.0;
  for (const auto& a : addrs) {
    auto r = read_resistance(array.cell(a), v_read, v_wl, model, rng);
    if (r.open_circuit) continue;
    total += std::min(v_read / r.resistance, i_limit);
  }
  return total;
}

OverlapError::OverlapError(Gap gap)
    : std::runtime_error("classes overlap at the " + gap.name + " gap: lower class reaches " +
                         format_ua(gap.lower_max) + ", upper class starts at " +
                         format_ua(gap.upper_min)),
      gap_(std::move(gap)) {}

ClassGaps measure_gaps(std::span<const CurrentSample> samples) {
  Extremes c00, c01, c11, c0, c1;
  for (const auto& s : samples) {
    if (s.input_class == "00") c00.add(s.current);
    else if (s.input_class == "01" || s.input_class == "10") c01.add(s.current);
    else if (s.input_class == "11") c11.add(s.current);
    else if (s.input_class == "0") c0.add(s.current);
    else if (s.input_class == "1") c1.add(s.current);
    else throw std::invalid_argument("unexpected scouting class '" + s.input_class + "'");
  }
  if (c00.count == 0 || c01.count == 0 || c11.count == 0) {
    throw std::invalid_argument("reference placement needs samples of classes 00, 01/10 and 11");
  }
  ClassGaps g;
  g.or_gap = {"or", c00.max, c01.min};
  g.and_gap = {"and", c01.max, c11.min};
  if (c0.count > 0 && c1.count > 0) g.read = Gap{"read", c0.max, c1.min};
  return g;
}

ReferenceSet references_from_gaps(const ClassGaps& gaps) {
  ReferenceSet r;
  r.i_or = gaps.or_gap.midpoint();
  r.i_and = gaps.and_gap.midpoint();
  r.i_read = gaps.read ? gaps.read->midpoint() : 0.5 * r.i_or;
  return r;
}

ReferenceSet place_references(std::span<const CurrentSample> samples) {
  const auto gaps = measure_gaps(samples);
  if (gaps.read && !gaps.read->open()) throw OverlapError(*gaps.read);
  if (!gaps.or_gap.open()) throw OverlapError(gaps.or_gap);
  if (!gaps.and_gap.open()) throw OverlapError(gaps.and_gap);
  return references_from_gaps(gaps);
}

bool classify(double current, const ReferenceSet& refs, ScoutOp op) {
  switch (op) {
    case ScoutOp::Read: return current > refs.i_read;
    case ScoutOp::Or: return current > refs.i_or;
    case ScoutOp::And: return current > refs.i_and;
    case ScoutOp::Xor: return current > refs.i_xor1() && current < refs.i_xor2();
  }
  return false;
}

bool scouting_gate(MemoryArray& array, std::span<const CellAddress> addrs,
                   const std::vector<bool>& bits, ScoutOp op, const ReferenceSet& refs,
                   const LogicVoltages& v, Rng& rng) {
  const std::size_t need = op == ScoutOp::Read ? 1 : 2;
  if (addrs.size() != need) {
    throw std::invalid_argument(std::string(to_string(op)) + " takes " + std::to_string(need) +
                                " cell(s)");
  }
  write_inputs(array, addrs, bits, v, rng);
  return classify(scout_current(array, addrs, rng, v.v_read, v.v_g_read), refs, op);
}

std::vector<Gap> popcount_gaps(const std::vector<std::vector<double>>& by_popcount) {
  std::vector<Gap> gaps;
  for (std::size_t k = 0; k + 1 < by_popcount.size(); ++k) {
    const auto& lo = by_popcount[k];
    const auto& hi = by_popcount[k + 1];
    if (lo.empty() || hi.empty()) {
      throw std::invalid_argument("popcount class " + std::to_string(lo.empty() ? k : k + 1) +
                                  " has no samples");
    }
    gaps.push_back({std::to_string(k) + "|" + std::to_string(k + 1),
                    *std::max_element(lo.begin(), lo.end()),
                    *std::min_element(hi.begin(), hi.end())});
  }
  return gaps;
}

std::vector<double> extend_n_inputs(std::size_t n, const std::vector<std::vector<double>>& by_popcount) {
  if (n < 2) throw std::invalid_argument("n-input scouting needs n >= 2");
  if (by_popcount.size() != n + 1) {
    throw std::invalid_argument("expected " + std::to_string(n + 1) + " popcount classes");
  }
  std::vector<double> thresholds;
  for (const auto& g : popcount_gaps(by_popcount)) {
    if (!g.open()) throw OverlapError(g);
    thresholds.push_back(g.midpoint());
  }
  return thresholds;
}

}  // namespace memlogic
