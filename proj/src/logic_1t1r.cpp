#include "memlogic/logic_1t1r.hpp"

#include <fstream>
#include <sstream>

namespace memlogic {

namespace {

std::array<LogicCase, 16> build_case_table() {
  std::array<LogicCase, 16> table{};
  for (int id = 1; id <= 16; ++id) {
    const int code = 16 - id;
    LogicCase c;
    c.case_id = id;
    c.g = (code >> 3) & 1;
    c.te = (code >> 2) & 1;
    c.be = (code >> 1) & 1;
    c.i = code & 1;
    c.te_minus_be = int(c.te) - int(c.be);
    c.process = c.te_minus_be > 0 ? Process::Set
                : c.te_minus_be < 0 ? Process::Reset
                                    : Process::None;
    // Switching needs an open transistor and a state the process can change.
    c.possible = c.g && ((c.process == Process::Set && !c.i) ||
                         (c.process == Process::Reset && c.i));
    table[id - 1] = c;
  }
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(Process p) {
  switch (p) {
    case Process::None: return "/";
    case Process::Set: return "SET";
    case Process::Reset: return "RESET";
  }
  return "?";
}

const std::array<LogicCase, 16>& case_table() {
  static const std::array<LogicCase, 16> table = build_case_table();
  return table;
}

LogicCase classify_case(bool g, bool te, bool be, bool i) {
  const int code = (int(g) << 3) | (int(te) << 2) | (int(be) << 1) | int(i);
  return case_table()[15 - code];
}

bool expected_output(const LogicCase& c) {
  if (c.case_id == 4) return true;
  if (c.case_id == 5) return false;
  return c.i;
}

std::string_view to_token(Operand o) {
  switch (o) {
    case Operand::Const0: return "0";
    case Operand::Const1: return "1";
    case Operand::P: return "p";
    case Operand::NotP: return "!p";
    case Operand::Q: return "q";
    case Operand::NotQ: return "!q";
  }
  return "?";
}

Operand parse_operand(std::string_view token) {
  for (Operand o : kOperandOrder) {
    if (to_token(o) == token) return o;
  }
  throw std::invalid_argument("unknown operand token '" + std::string(token) +
                              "' (expected 0, 1, p, !p, q, !q)");
}

bool resolve(Operand o, bool p, bool q) {
  switch (o) {
    case Operand::Const0: return false;
    case Operand::Const1: return true;
    case Operand::P: return p;
    case Operand::NotP: return !p;
    case Operand::Q: return q;
    case Operand::NotQ: return !q;
  }
  return false;
}

ParamMapping builtin_mapping(std::string_view name) {
  using enum Operand;
  if (name == "OR") return {"OR", Const1, Q, Const0, P};
  if (name == "AND") return {"AND", P, Q, Const0, Const0};
  if (name == "NIMP") return {"NIMP", Const1, Const0, P, Q};
  if (name == "XOR") return {"XOR", Q, NotP, P, P};
  if (name == "NOTP") return {"NOTP", Const0, Const0, Q, NotP};
  std::string names;
  for (const auto& n : builtin_names()) names += (names.empty() ? "" : ", ") + n;
  throw UnknownGate("unknown gate '" + std::string(name) + "' (builtin: " + names + ")");
}

std::vector<std::string> builtin_names() { return {"OR", "AND", "NIMP", "XOR", "NOTP"}; }

MappingEvaluation evaluate_mapping(const ParamMapping& m, bool p, bool q) {
  MappingEvaluation e;
  e.g = resolve(m.g, p, q);
  e.te = resolve(m.te, p, q);
  e.be = resolve(m.be, p, q);
  e.i = resolve(m.i, p, q);
  const auto c = classify_case(e.g, e.te, e.be, e.i);
  e.case_id = c.case_id;
  e.output = expected_output(c);
  return e;
}

std::string TruthTable::str() const {
  std::string s;
  for (bool b : out) s += b ? '1' : '0';
  return s;
}

TruthTable TruthTable::parse(std::string_view bits) {
  if (bits.size() != 4) throw std::invalid_argument("truth table needs 4 bits, got '" + std::string(bits) + "'");
  TruthTable t;
  for (std::size_t k = 0; k < 4; ++k) {
    if (bits[k] != '0' && bits[k] != '1') {
      throw std::invalid_argument("truth table bits must be 0/1, got '" + std::string(bits) + "'");
    }
    t.out[k] = bits[k] == '1';
  }
  return t;
}

TruthTable TruthTable::from_index(unsigned idx) {
  TruthTable t;
  for (unsigned k = 0; k < 4; ++k) t.out[k] = (idx >> (3 - k)) & 1U;
  return t;
}

TruthTable truth_table_of(const ParamMapping& m) {
  TruthTable t;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) t.out[2 * p + q] = evaluate_mapping(m, p, q).output;
  return t;
}

ParamMapping synthesize_mapping(const TruthTable& target) {
  ParamMapping m;
  m.name = "tt_" + target.str();
  for (Operand g : kOperandOrder)
    for (Operand te : kOperandOrder)
      for (Operand be : kOperandOrder)
        for (Operand i : kOperandOrder) {
          m.g = g;
          m.te = te;
          m.be = be;
          m.i = i;
          if (truth_table_of(m) == target) return m;
        }
  throw Unrealizable("no (G, TE, BE, I) assignment realizes truth table " + target.str());
}

Pulse LogicVoltages::logic_pulse(bool g, bool te, bool be) const {
  Pulse pulse;
  pulse.width = t_pulse;
  if (te && be) {
    pulse.v_te = pulse.v_be = v_te_set;
  } else {
    pulse.v_te = te ? v_te_set : 0.0;
    pulse.v_be = be ? v_be_reset : 0.0;
  }
  if (g) pulse.v_g = (te && !be) ? v_g_set : v_g_reset;
  return pulse;
}

InitFailure::InitFailure(CellAddress addr, bool bit, int attempts)
    : std::runtime_error("cell " + to_string(addr) + " did not reach " +
                         (bit ? std::string("LRS") : std::string("HRS")) + " after " +
                         std::to_string(attempts) + " initialization attempts"),
      addr_(addr) {}

double read_cell(const MemoryArray& array, const CellAddress& addr, const LogicVoltages& v,
                 Rng& rng) {
  auto r = read_resistance(array.cell(addr), v.v_read, v.v_g_read, array.model(), rng);
  if (r.open_circuit) throw std::runtime_error("open circuit reading cell " + to_string(addr));
  return r.resistance;
}

InitResult initialize_cell(MemoryArray& array, const CellAddress& addr, bool bit,
                           const LogicVoltages& v, Rng& rng) {
  const double boundary = array.model().variability.boundary();
  InitResult res;
  res.resistance = read_cell(array, addr, v, rng);
  while (binarize(res.resistance, boundary) != bit) {
    if (res.pulses >= v.init_retry_max) throw InitFailure(addr, bit, res.pulses);
    const Pulse pulse = bit ? v.set_pulse() : v.reset_pulse();
    apply_drive(array, single_cell_drive(array.topology(), addr, pulse), rng);
    ++res.pulses;
    res.resistance = read_cell(array, addr, v, rng);
  }
  return res;
}

GateTrace execute_gate(MemoryArray& array, const CellAddress& addr, const ParamMapping& m, bool p,
                       bool q, const LogicVoltages& v, Rng& rng) {
  const auto eval = evaluate_mapping(m, p, q);
  GateTrace t;
  t.gate = m.name;
  t.p = p;
  t.q = q;
  t.g = eval.g;
  t.te = eval.te;
  t.be = eval.be;
  t.i = eval.i;
  t.case_id = eval.case_id;
  t.expected_bit = eval.output;

  const auto init = initialize_cell(array, addr, eval.i, v, rng);
  t.init_retries = init.pulses;
  t.init_resistance = init.resistance;
  t.init_state_resistance = array.cell(addr).resistance;

  const Pulse pulse = v.logic_pulse(eval.g, eval.te, eval.be);
  for (const auto& ev : apply_drive(array, single_cell_drive(array.topology(), addr, pulse), rng)) {
    if (ev.addr == addr) t.event = ev.event;
  }
  t.final_state_resistance = array.cell(addr).resistance;
  t.final_resistance = read_cell(array, addr, v, rng);
  t.output_bit = binarize(t.final_resistance, array.model().variability.boundary());
  return t;
}

std::vector<GateTrace> run_cascade(MemoryArray& array, const CellAddress& addr,
                                   std::span<const GateStep> gates, const LogicVoltages& v,
                                   Rng& rng) {
  std::vector<GateTrace> traces;
  traces.reserve(gates.size());
  for (std::size_t k = 0; k < gates.size(); ++k) {
    try {
      traces.push_back(execute_gate(array, addr, gates[k].mapping, gates[k].p, gates[k].q, v, rng));
    } catch (const std::exception& e) {
      throw CascadeError(k, e.what());
    }
  }
  return traces;
}

std::vector<ParamMapping> parse_gate_library(std::string_view text) {
  std::vector<ParamMapping> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split_csv_line(t);
    if (!header_seen && !fields.empty() && fields[0] == "name") {
      header_seen = true;
      continue;
    }
    if (fields.size() != 5) {
      throw std::invalid_argument("gate library line " + std::to_string(lineno) +
                                  ": expected 5 fields name,g,te,be,i");
    }
    try {
      out.push_back({fields[0], parse_operand(fields[1]), parse_operand(fields[2]),
                     parse_operand(fields[3]), parse_operand(fields[4])});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("gate library line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ParamMapping> read_gate_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gate library '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gate_library(ss.str());
}

std::string format_gate_library(std::span<const ParamMapping> mappings) {
  std::string s = "name,g,te,be,i\n";
  for (const auto& m : mappings) {
    s += m.name;
    for (Operand o : {m.g, m.te, m.be, m.i}) {
      s += ',';
      s += to_token(o);
    }
    s += '\n';
  }
  return s;
}

std::vector<ParamMapping> synthesized_library() {
  std::vector<ParamMapping> out;
  for (unsigned idx = 0; idx < 16; ++idx) out.push_back(synthesize_mapping(TruthTable::from_index(idx)));
  return out;
}

std::vector<ParamMapping> default_gate_library() {
  std::vector<ParamMapping> out;
  for (const auto& n : builtin_names()) out.push_back(builtin_mapping(n));
  for (auto& m : synthesized_library()) out.push_back(std::move(m));
  return out;
}

}  // namespace memlogic
