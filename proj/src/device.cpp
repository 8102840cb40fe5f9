#include "memlogic/device.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace memlogic {

namespace {

constexpr int kMaxRedraws = 1000;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double lognormal(double median, double sigma, Rng& rng) {
  if (sigma == 0.0) return median;
  return median * std::exp(sigma * standard_normal(rng));
}

double positive_normal(double mean, double sigma, Rng& rng) {
  if (sigma == 0.0) return mean;
  for (int i = 0; i < kMaxRedraws; ++i) {
    double v = mean + sigma * standard_normal(rng);
    if (v > 0.0) return v;
  }
  return mean;
}

// Draws are rejected until they respect the last realized value of the
// opposite state, so a cell's LRS stays strictly below its HRS.
double draw_lrs(const MemristorCell& cell, const VariabilityParams& p,
                Rng& rng) {
  for (int i = 0; i < kMaxRedraws; ++i) {
    double r = lognormal(cell.lrs_median_cell, p.lrs_sigma_c2c, rng);
    if (cell.last_hrs == 0.0 || r < cell.last_hrs) return r;
  }
  return std::min(cell.lrs_median_cell, 0.5 * cell.last_hrs);
}

double draw_hrs(const MemristorCell& cell, const VariabilityParams& p,
                Rng& rng) {
  for (int i = 0; i < kMaxRedraws; ++i) {
    double r = lognormal(cell.hrs_median_cell, p.hrs_sigma_c2c, rng);
    if (cell.last_lrs == 0.0 || r > cell.last_lrs) return r;
  }
  return std::max(cell.hrs_median_cell, 2.0 * cell.last_lrs);
}

void enter_lrs(MemristorCell& cell, const VariabilityParams& p, Rng& rng) {
  cell.resistance = draw_lrs(cell, p, rng);
  cell.last_lrs = cell.resistance;
  cell.state = CellState::Lrs;
}

void enter_hrs(MemristorCell& cell, const VariabilityParams& p, Rng& rng) {
  cell.resistance = draw_hrs(cell, p, rng);
  cell.last_hrs = cell.resistance;
  cell.state = CellState::Hrs;
}

// A disturb re-samples the resistance but never leaves it on the LRS side of
// the read boundary.
void disturb_hrs(MemristorCell& cell, const VariabilityParams& p, Rng& rng) {
  const double boundary = p.boundary();
  for (int i = 0; i < kMaxRedraws; ++i) {
    double r = draw_hrs(cell, p, rng);
    if (!binarize(r, boundary)) {
      cell.resistance = r;
      cell.last_hrs = r;
      return;
    }
  }
}

}  // namespace

void VariabilityParams::validate() const {
  require(lrs_median > 0.0 && hrs_median > 0.0, "resistance medians must be > 0");
  require(hrs_median / lrs_median >= 2.0, "hrs_median / lrs_median must be >= 2");
  require(lrs_sigma_c2c >= 0.0 && lrs_sigma_d2d >= 0.0 && hrs_sigma_c2c >= 0.0 &&
              hrs_sigma_d2d >= 0.0,
          "resistance sigmas must be >= 0");
  require(v_set_th_median > 0.0 && v_reset_th_median > 0.0 && v_form_th_median > 0.0,
          "threshold medians must be > 0");
  require(v_set_th_sigma >= 0.0 && v_reset_th_sigma >= 0.0 && v_form_th_sigma >= 0.0,
          "threshold sigmas must be >= 0");
  require(read_noise_lrs >= 0.0, "read_noise_lrs must be >= 0");
  require(read_noise_hrs >= read_noise_lrs, "read_noise_hrs must be >= read_noise_lrs");
  require(min_pulse_set > 0.0 && min_pulse_reset > 0.0, "minimum pulse widths must be > 0");
}

double VariabilityParams::boundary() const { return std::sqrt(lrs_median * hrs_median); }

VariabilityParams VariabilityParams::table3_logic() { return {}; }

VariabilityParams VariabilityParams::fig1f_nominal() {
  VariabilityParams p;
  p.v_set_th_median = 2.0;
  p.v_set_th_sigma = 0.1;
  p.v_reset_th_median = 1.2;
  p.v_reset_th_sigma = 0.1;
  p.min_pulse_set = 3.0e-7;
  p.min_pulse_reset = 3.0e-6;
  return p;
}

VariabilityParams VariabilityParams::preset(std::string_view name) {
  if (name == "table3-logic") return table3_logic();
  if (name == "fig1f-nominal") return fig1f_nominal();
  throw std::invalid_argument("unknown device preset '" + std::string(name) +
                              "' (available: table3-logic, fig1f-nominal)");
}

double TransistorModel::saturation_current(double v_g) const {
  if (!conducts(v_g)) return 0.0;
  return std::min(i_sat_slope * (v_g - v_g_on_threshold), i_sat_max);
}

void TransistorModel::validate() const {
  require(r_on >= 0.0, "transistor r_on must be >= 0");
  require(i_sat_slope >= 0.0 && i_sat_max >= 0.0, "transistor saturation parameters must be >= 0");
}

void Pulse::validate() const {
  require(std::isfinite(v_te) && std::isfinite(v_be) && std::isfinite(v_g),
          "pulse voltages must be finite");
  require(width > 0.0, "pulse width must be > 0");
}

std::string_view to_string(SwitchEvent e) {
  switch (e) {
    case SwitchEvent::None: return "none";
    case SwitchEvent::Set: return "set";
    case SwitchEvent::Reset: return "reset";
    case SwitchEvent::Formed: return "formed";
    case SwitchEvent::HrsDisturb: return "hrs_disturb";
  }
  return "?";
}

std::string_view to_string(CellState s) {
  switch (s) {
    case CellState::Pristine: return "pristine";
    case CellState::Lrs: return "lrs";
    case CellState::Hrs: return "hrs";
  }
  return "?";
}

MemristorCell sample_fresh_cell(const VariabilityParams& params, Rng& rng,
                                std::uint64_t cell_id) {
  MemristorCell cell;
  cell.cell_id = cell_id;
  for (int i = 0; i < kMaxRedraws; ++i) {
    cell.lrs_median_cell = lognormal(params.lrs_median, params.lrs_sigma_d2d, rng);
    cell.hrs_median_cell = lognormal(params.hrs_median, params.hrs_sigma_d2d, rng);
    if (cell.lrs_median_cell < cell.hrs_median_cell) break;
    cell.lrs_median_cell = params.lrs_median;
    cell.hrs_median_cell = params.hrs_median;
  }
  cell.v_set_th = positive_normal(params.v_set_th_median, params.v_set_th_sigma, rng);
  cell.v_reset_th = positive_normal(params.v_reset_th_median, params.v_reset_th_sigma, rng);
  cell.v_form_th = positive_normal(params.v_form_th_median, params.v_form_th_sigma, rng);
  cell.state = CellState::Pristine;
  cell.resistance = params.pristine_resistance();
  return cell;
}

void check_drive(const MemristorCell& cell, const Pulse& pulse,
                 const TransistorModel& transistor) {
  if (!transistor.conducts(pulse.v_g)) return;
  if (pulse.v_te >= cell.v_set_th && pulse.v_be >= cell.v_reset_th &&
      pulse.v_te != pulse.v_be) {
    throw InvalidDrive("ambiguous drive: TE " + std::to_string(pulse.v_te) + " V and BE " +
                       std::to_string(pulse.v_be) +
                       " V both exceed their switching thresholds");
  }
}

PulseOutcome apply_pulse(const MemristorCell& cell, const Pulse& pulse,
                         const DeviceModel& model, Rng& rng) {
  pulse.validate();
  PulseOutcome out{cell, SwitchEvent::None};
  const auto& p = model.variability;
  if (!model.transistor.conducts(pulse.v_g)) return out;
  check_drive(cell, pulse, model.transistor);

  const double drop = pulse.drop();
  MemristorCell& next = out.cell;
  switch (cell.state) {
    case CellState::Pristine:
      if (drop >= cell.v_form_th && pulse.width >= p.min_pulse_set) {
        enter_lrs(next, p, rng);
        out.event = SwitchEvent::Formed;
      }
      break;
    case CellState::Hrs:
      if (drop >= cell.v_set_th && pulse.width >= p.min_pulse_set) {
        enter_lrs(next, p, rng);
        out.event = SwitchEvent::Set;
      } else if (drop < 0.0) {
        disturb_hrs(next, p, rng);
        out.event = SwitchEvent::HrsDisturb;
      }
      break;
    case CellState::Lrs:
      if (-drop >= cell.v_reset_th && pulse.width >= p.min_pulse_reset) {
        enter_hrs(next, p, rng);
        ++next.cycle_count;
        out.event = SwitchEvent::Reset;
      }
      break;
  }
  return out;
}

ReadResult read_resistance(const MemristorCell& cell, double v_read, double v_g,
                           const DeviceModel& model, Rng& rng) {
  if (std::abs(v_read) >= std::min(cell.v_set_th, cell.v_reset_th)) {
    throw std::invalid_argument("read voltage must stay below both switching thresholds");
  }
  if (!model.transistor.conducts(v_g)) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  const auto& p = model.variability;
  double sigma = 0.0;
  if (cell.state == CellState::Lrs) sigma = p.read_noise_lrs;
  if (cell.state == CellState::Hrs) sigma = p.read_noise_hrs;
  return {lognormal(cell.resistance, sigma, rng) + model.transistor.r_on, false};
}

bool binarize(double resistance, double r_boundary) { return resistance < r_boundary; }

FormingResult form_with_ramp(const MemristorCell& cell, const DeviceModel& model,
                             Rng& rng, const FormingRamp& ramp) {
  FormingResult result{cell, 0.0, 0};
  if (cell.state != CellState::Pristine) return result;
  // Integer step index avoids accumulating float error over the ramp.
  const int steps = static_cast<int>(std::floor((ramp.v_stop - ramp.v_start) / ramp.v_step + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const double v = ramp.v_start + k * ramp.v_step;
    if (v <= 0.0) continue;
    Pulse pulse{v, 0.0, ramp.v_g, ramp.width};
    auto outcome = apply_pulse(result.cell, pulse, model, rng);
    ++result.pulses;
    result.cell = outcome.cell;
    if (outcome.event == SwitchEvent::Formed) {
      result.v_formed = v;
      return result;
    }
  }
  throw FormingFailure("cell " + std::to_string(cell.cell_id) + " did not form up to " +
                       std::to_string(ramp.v_stop) + " V");
}

namespace {

struct Field {
  std::string_view name;
  double VariabilityParams::*member;
};

constexpr Field kFields[] = {
    {"lrs_median", &VariabilityParams::lrs_median},
    {"lrs_sigma_c2c", &VariabilityParams::lrs_sigma_c2c},
    {"lrs_sigma_d2d", &VariabilityParams::lrs_sigma_d2d},
    {"hrs_median", &VariabilityParams::hrs_median},
    {"hrs_sigma_c2c", &VariabilityParams::hrs_sigma_c2c},
    {"hrs_sigma_d2d", &VariabilityParams::hrs_sigma_d2d},
    {"v_set_th_median", &VariabilityParams::v_set_th_median},
    {"v_set_th_sigma", &VariabilityParams::v_set_th_sigma},
    {"v_reset_th_median", &VariabilityParams::v_reset_th_median},
    {"v_reset_th_sigma", &VariabilityParams::v_reset_th_sigma},
    {"v_form_th_median", &VariabilityParams::v_form_th_median},
    {"v_form_th_sigma", &VariabilityParams::v_form_th_sigma},
    {"read_noise_lrs", &VariabilityParams::read_noise_lrs},
    {"read_noise_hrs", &VariabilityParams::read_noise_hrs},
    {"min_pulse_set", &VariabilityParams::min_pulse_set},
    {"min_pulse_reset", &VariabilityParams::min_pulse_reset},
};

constexpr auto kFieldNames = [] {
  std::array<std::string_view, std::size(kFields)> names{};
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = kFields[i].name;
  return names;
}();

const Field& find_field(std::string_view name) {
  for (const auto& f : kFields) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown device parameter '" + std::string(name) + "'");
}

}  // namespace

std::span<const std::string_view> variability_field_names() { return kFieldNames; }

void set_field(VariabilityParams& params, std::string_view name, double value) {
  params.*(find_field(name).member) = value;
}

double get_field(const VariabilityParams& params, std::string_view name) {
  return params.*(find_field(name).member);
}

}  // namespace memlogic
