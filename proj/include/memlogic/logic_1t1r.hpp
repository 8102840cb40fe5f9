#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memlogic/array.hpp"

namespace memlogic {

enum class Process { None, Set, Reset };

std::string_view to_string(Process p);

/// One row of the 16-case table over the gate inputs (G, TE, BE, I).
struct LogicCase {
  int case_id = 0;
  bool g = false;
  bool te = false;
  bool be = false;
  bool i = false;
  int te_minus_be = 0;
  Process process = Process::None;
  bool possible = false;
};

/// Rows in table order: case 1 is (1,1,1,1), case 16 is (0,0,0,0).
const std::array<LogicCase, 16>& case_table();

LogicCase classify_case(bool g, bool te, bool be, bool i);

/// The case output: 1 for case 4, 0 for case 5, the initial state otherwise.
bool expected_output(const LogicCase& c);

enum class Operand { Const0, Const1, P, NotP, Q, NotQ };

inline constexpr std::array<Operand, 6> kOperandOrder = {
    Operand::Const0, Operand::Const1, Operand::P, Operand::NotP, Operand::Q, Operand::NotQ};

/// Tokens: 0, 1, p, !p, q, !q.
std::string_view to_token(Operand o);
Operand parse_operand(std::string_view token);
bool resolve(Operand o, bool p, bool q);

struct ParamMapping {
  std::string name;
  Operand g = Operand::Const0;
  Operand te = Operand::Const0;
  Operand be = Operand::Const0;
  Operand i = Operand::Const0;

  bool same_inputs(const ParamMapping& o) const {
    return g == o.g && te == o.te && be == o.be && i == o.i;
  }
};

class UnknownGate : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// OR, AND, NIMP, XOR and NOTP.
ParamMapping builtin_mapping(std::string_view name);
std::vector<std::string> builtin_names();

struct MappingEvaluation {
  bool g = false;
  bool te = false;
  bool be = false;
  bool i = false;
  int case_id = 0;
  bool output = false;
};

MappingEvaluation evaluate_mapping(const ParamMapping& m, bool p, bool q);

/// Output bits indexed by 2p + q, i.e. the string "0111" is OR.
struct TruthTable {
  std::array<bool, 4> out{};

  bool operator()(bool p, bool q) const { return out[2 * p + q]; }
  bool operator==(const TruthTable&) const = default;
  std::string str() const;
  static TruthTable parse(std::string_view bits);
  static TruthTable from_index(unsigned idx);  // idx in [0, 16), bit k of idx -> out[3-k]
};

TruthTable truth_table_of(const ParamMapping& m);

class Unrealizable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Exhaustive search over all 6^4 assignments in (G, TE, BE, I) order with
/// operands ordered 0 < 1 < p < !p < q < !q; returns the first match.
ParamMapping synthesize_mapping(const TruthTable& target);

/// Pulse operating point plus the per-bit composition of logic pulses.
struct LogicVoltages {
  double v_te_set = 1.3;
  double v_g_set = 1.3;
  double v_be_reset = 1.6;
  double v_g_reset = 3.0;
  double v_read = 0.1;
  double v_g_read = 3.0;
  double t_pulse = 1.0e-6;
  int init_retry_max = 3;

  Pulse set_pulse() const { return {v_te_set, 0.0, v_g_set, t_pulse}; }
  Pulse reset_pulse() const { return {0.0, v_be_reset, v_g_reset, t_pulse}; }
  /// Physical pulse for resolved logic levels. TE=BE=1 drives both electrodes
  /// at the SET amplitude so the cell sees no drop.
  Pulse logic_pulse(bool g, bool te, bool be) const;
};

class InitFailure : public std::runtime_error {
 public:
  InitFailure(CellAddress addr, bool bit, int attempts);
  const CellAddress& address() const { return addr_; }

 private:
  CellAddress addr_;
};

struct InitResult {
  int pulses = 0;  // initialization pulses applied; 0 when the cell already held the bit
  double resistance = 0.0;  // verifying read
};

/// Brings the cell to `bit` with the operating-point SET/RESET pulses, verifying each
/// attempt with a read. Throws InitFailure after `init_retry_max` attempts.
InitResult initialize_cell(MemoryArray& array, const CellAddress& addr, bool bit,
                           const LogicVoltages& v, Rng& rng);

/// Noisy read through the array; throws std::runtime_error on open circuit.
double read_cell(const MemoryArray& array, const CellAddress& addr, const LogicVoltages& v,
                 Rng& rng);

struct GateTrace {
  std::string gate;
  std::size_t cycle = 0;
  bool p = false;
  bool q = false;
  bool g = false;
  bool te = false;
  bool be = false;
  bool i = false;
  int case_id = 0;
  SwitchEvent event = SwitchEvent::None;
  double init_resistance = 0.0;   // read after initialization
  double final_resistance = 0.0;  // read after the logic pulse
  double init_state_resistance = 0.0;   // noise-free, before the logic pulse
  double final_state_resistance = 0.0;  // noise-free, after the logic pulse
  bool output_bit = false;
  bool expected_bit = false;
  int init_retries = 0;
};

GateTrace execute_gate(MemoryArray& array, const CellAddress& addr, const ParamMapping& m, bool p,
                       bool q, const LogicVoltages& v, Rng& rng);

struct GateStep {
  ParamMapping mapping;
  bool p = false;
  bool q = false;
};

class CascadeError : public std::runtime_error {
 public:
  CascadeError(std::size_t step, const std::string& what)
      : std::runtime_error("cascade step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Runs gates back to back on one cell; each step re-initializes only when
/// the previous output differs from the bit the step needs.
std::vector<GateTrace> run_cascade(MemoryArray& array, const CellAddress& addr,
                                   std::span<const GateStep> gates, const LogicVoltages& v,
                                   Rng& rng);

/// Gate library rows `name,g,te,be,i`.
std::vector<ParamMapping> read_gate_library(const std::string& path);
std::vector<ParamMapping> parse_gate_library(std::string_view text);
std::string format_gate_library(std::span<const ParamMapping> mappings);

/// The five builtin mappings followed by one synthesized mapping per truth table.
std::vector<ParamMapping> default_gate_library();
std::vector<ParamMapping> synthesized_library();

}  // namespace memlogic
