#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "memlogic/rng.hpp"

namespace memlogic {

/// Distribution parameters of a VCM 1T1R population.
///
/// Resistances are lognormal: `*_median` is the population median in ohm,
/// `*_sigma_d2d` the log-space spread of a cell's own median around it and
/// `*_sigma_c2c` the log-space spread of successive switching cycles of one
/// cell. Thresholds are normal, truncated at zero. Read noise is a
/// multiplicative log-space jitter applied per read.
struct VariabilityParams {
  double lrs_median = 5.0e3;
  double lrs_sigma_c2c = 0.05;
  double lrs_sigma_d2d = 0.05;
  double hrs_median = 97.0e3;
  double hrs_sigma_c2c = 0.45;
  double hrs_sigma_d2d = 0.08;
  double v_set_th_median = 1.0;
  double v_set_th_sigma = 0.05;
  double v_reset_th_median = 0.9;
  double v_reset_th_sigma = 0.05;
  double v_form_th_median = 3.0;
  double v_form_th_sigma = 0.2;
  double read_noise_lrs = 0.005;
  double read_noise_hrs = 0.04;
  double min_pulse_set = 3.0e-7;
  double min_pulse_reset = 3.0e-7;

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  /// Geometric mean of the two medians; the default LRS/HRS decision boundary.
  double boundary() const;

  /// Resistance reported for a pristine (unformed) device.
  double pristine_resistance() const { return 100.0 * hrs_median; }

  /// Operating point used by the logic experiments (the default).
  static VariabilityParams table3_logic();
  /// Nominal switching voltages and pulse minima of the device datasheet.
  static VariabilityParams fig1f_nominal();
  /// Throws std::invalid_argument for an unknown preset name.
  static VariabilityParams preset(std::string_view name);
};

/// Behavioral access transistor: open below `v_g_on_threshold`, otherwise a
/// series `r_on` with a saturation current linear in the gate overdrive.
struct TransistorModel {
  double v_g_on_threshold = 0.5;
  double r_on = 0.0;
  double i_sat_slope = 100.0e-6;  // A/V of overdrive
  double i_sat_max = 300.0e-6;

  bool conducts(double v_g) const { return v_g >= v_g_on_threshold; }
  double saturation_current(double v_g) const;
  void validate() const;
};

/// Field access by name, for config files and parameter sweeps.
std::span<const std::string_view> variability_field_names();
void set_field(VariabilityParams& params, std::string_view name, double value);
double get_field(const VariabilityParams& params, std::string_view name);

struct DeviceModel {
  VariabilityParams variability;
  TransistorModel transistor;
};

enum class CellState { Pristine, Lrs, Hrs };

struct MemristorCell {
  std::uint64_t cell_id = 0;
  double lrs_median_cell = 0.0;
  double hrs_median_cell = 0.0;
  double v_set_th = 0.0;
  double v_reset_th = 0.0;
  double v_form_th = 0.0;
  CellState state = CellState::Pristine;
  double resistance = 0.0;  // noise-free state resistance
  int cycle_count = 0;
  // Most recent realized resistance in each state; 0 until first reached.
  double last_lrs = 0.0;
  double last_hrs = 0.0;

  /// Binary projection of the state: LRS is '1', HRS and pristine are '0'.
  bool bit() const { return state == CellState::Lrs; }
};

struct Pulse {
  double v_te = 0.0;
  double v_be = 0.0;
  double v_g = 0.0;
  double width = 1.0e-6;

  double drop() const { return v_te - v_be; }
  void validate() const;
  bool operator==(const Pulse&) const = default;
};

enum class SwitchEvent { None, Set, Reset, Formed, HrsDisturb };

std::string_view to_string(SwitchEvent e);
std::string_view to_string(CellState s);

/// A pulse that drives both electrodes above their switching thresholds at
/// different levels; the behavioral model cannot assign it a polarity.
class InvalidDrive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MemristorCell sample_fresh_cell(const VariabilityParams& params, Rng& rng,
                                std::uint64_t cell_id = 0);

struct PulseOutcome {
  MemristorCell cell;
  SwitchEvent event = SwitchEvent::None;
};

/// Throws InvalidDrive if the transistor conducts and the drive is ambiguous.
void check_drive(const MemristorCell& cell, const Pulse& pulse,
                 const TransistorModel& transistor);

/// State transition of one cell under one pulse. Rules, first match wins:
///   transistor off -> None; pristine above forming threshold -> Formed;
///   HRS above SET threshold -> Set; LRS above RESET threshold -> Reset;
///   HRS under any RESET-polarity drop -> HrsDisturb (resistance re-drawn);
///   otherwise None.
PulseOutcome apply_pulse(const MemristorCell& cell, const Pulse& pulse,
                         const DeviceModel& model, Rng& rng);

struct ReadResult {
  double resistance = 0.0;
  bool open_circuit = false;
};

/// Noisy read of the state resistance plus the transistor on-resistance.
/// With the transistor off the result is flagged open-circuit and infinite.
ReadResult read_resistance(const MemristorCell& cell, double v_read,
                           double v_g, const DeviceModel& model, Rng& rng);

/// 1 (LRS) iff `resistance < r_boundary`; ties map to 0.
bool binarize(double resistance, double r_boundary);

struct FormingRamp {
  double v_start = 0.0;
  double v_step = 0.1;
  double v_stop = 4.8;
  double width = 1.0e-5;
  double v_g = 1.1;
};

class FormingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FormingResult {
  MemristorCell cell;
  double v_formed = 0.0;
  int pulses = 0;
};

/// Applies increasing TE pulses until the cell forms. Throws FormingFailure
/// if the ramp ends first.
FormingResult form_with_ramp(const MemristorCell& cell, const DeviceModel& model,
                             Rng& rng, const FormingRamp& ramp = {});

}  // namespace memlogic
