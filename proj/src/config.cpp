#include "memlogic/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace memlogic {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double to_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t to_uint(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true/false, got '" + std::string(s) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const auto table = [] {
    std::map<std::string, Setter, std::less<>> m;
    m["preset"] = [](RunConfig& c, std::string_view v) {
      c.experiment.device.variability = VariabilityParams::preset(v);
      c.preset = std::string(v);
    };
    for (auto name : variability_field_names()) {
      m["device." + std::string(name)] = [name](RunConfig& c, std::string_view v) {
        set_field(c.experiment.device.variability, name, to_double(v));
      };
    }
    auto dbl = [](double TransistorModel::*f) {
      return [f](RunConfig& c, std::string_view v) { c.experiment.device.transistor.*f = to_double(v); };
    };
    m["transistor.v_g_on_threshold"] = dbl(&TransistorModel::v_g_on_threshold);
    m["transistor.r_on"] = dbl(&TransistorModel::r_on);
    m["transistor.i_sat_slope"] = dbl(&TransistorModel::i_sat_slope);
    m["transistor.i_sat_max"] = dbl(&TransistorModel::i_sat_max);

    m["array.kind"] = [](RunConfig& c, std::string_view v) {
      c.experiment.topology.kind = parse_topology_kind(v);
    };
    m["array.rows"] = [](RunConfig& c, std::string_view v) { c.experiment.topology.rows = to_uint(v); };
    m["array.cols"] = [](RunConfig& c, std::string_view v) { c.experiment.topology.cols = to_uint(v); };

    auto volt = [](double LogicVoltages::*f) {
      return [f](RunConfig& c, std::string_view v) { c.experiment.voltages.*f = to_double(v); };
    };
    m["logic.v_te_set"] = volt(&LogicVoltages::v_te_set);
    m["logic.v_g_set"] = volt(&LogicVoltages::v_g_set);
    m["logic.v_be_reset"] = volt(&LogicVoltages::v_be_reset);
    m["logic.v_g_reset"] = volt(&LogicVoltages::v_g_reset);
    m["logic.v_read"] = volt(&LogicVoltages::v_read);
    m["logic.v_g_read"] = volt(&LogicVoltages::v_g_read);
    m["logic.t_pulse"] = volt(&LogicVoltages::t_pulse);
    m["logic.init_retry_max"] = [](RunConfig& c, std::string_view v) {
      c.experiment.voltages.init_retry_max = static_cast<int>(to_uint(v));
    };

    m["experiment.seed"] = [](RunConfig& c, std::string_view v) { c.experiment.seed = to_uint(v); };
    m["experiment.cycles"] = [](RunConfig& c, std::string_view v) {
      c.experiment.cycles = to_uint(v);
      if (c.experiment.cycles < 1) throw std::invalid_argument("cycles must be >= 1");
    };
    m["experiment.gates"] = [](RunConfig& c, std::string_view v) { c.gate_names = split_list(v); };
    m["experiment.gate_library"] = [](RunConfig& c, std::string_view v) { c.gate_library = std::string(v); };
    m["experiment.ops"] = [](RunConfig& c, std::string_view v) {
      c.experiment.ops.clear();
      for (const auto& op : split_list(v)) c.experiment.ops.push_back(parse_scout_op(op));
    };
    m["experiment.ref_mode"] = [](RunConfig& c, std::string_view v) {
      if (v == "split") c.experiment.ref_mode = RefMode::Split;
      else if (v == "insample") c.experiment.ref_mode = RefMode::InSample;
      else throw std::invalid_argument("ref_mode must be split or insample");
    };
    m["experiment.refs"] = [](RunConfig& c, std::string_view v) {
      if (v == "placed") c.experiment.ref_source = RefSource::Placed;
      else if (v == "paper" || v == "paper-refs") c.experiment.ref_source = RefSource::Measured;
      else throw std::invalid_argument("refs must be placed or paper-refs");
    };
    m["experiment.rotate_cells"] = [](RunConfig& c, std::string_view v) {
      c.experiment.rotate_cells = to_bool(v);
    };
    m["experiment.threads"] = [](RunConfig& c, std::string_view v) { c.experiment.threads = to_uint(v); };
    m["experiment.characterize_cells"] = [](RunConfig& c, std::string_view v) {
      c.characterize_cells = to_uint(v);
    };
    m["experiment.n_inputs"] = [](RunConfig& c, std::string_view v) { c.n_inputs = to_uint(v); };
    m["output.dir"] = [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); };
    m["output.format"] = [](RunConfig& c, std::string_view v) { c.format = parse_export_format(v); };
    return m;
  }();
  return table;
}

}  // namespace

ExportFormat parse_export_format(std::string_view s) {
  if (s == "csv") return ExportFormat::Csv;
  if (s == "json") return ExportFormat::Json;
  if (s == "both") return ExportFormat::Both;
  throw std::invalid_argument("format must be csv, json or both");
}

ConfigError::ConfigError(std::string source, int line, std::string key, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (key.empty() ? std::string() : ": key '" + key + "'") + ": " + what),
      line_(line),
      key_(std::move(key)) {}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("<setting>", 0, std::string(key), "unknown key");
  try {
    it->second(cfg, trim(value));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("<setting>", 0, std::string(key), e.what());
  }
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  struct Entry {
    int line;
    std::string key;
    std::string value;
  };
  std::vector<Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    auto line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(source), lineno, {}, "expected 'key = value'");
    }
    entries.push_back({lineno, trim(std::string_view(line).substr(0, eq)),
                       trim(std::string_view(line).substr(eq + 1))});
  }
  std::stable_partition(entries.begin(), entries.end(), [](const Entry& e) { return e.key == "preset"; });

  RunConfig cfg;
  const auto& table = setters();
  for (const auto& e : entries) {
    auto it = table.find(e.key);
    if (it == table.end()) throw ConfigError(std::string(source), e.line, e.key, "unknown key");
    try {
      it->second(cfg, e.value);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(std::string(source), e.line, e.key, ex.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, {}, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void resolve_gates(RunConfig& cfg) {
  if (cfg.gate_names.empty()) return;
  std::vector<ParamMapping> library;
  if (!cfg.gate_library.empty()) library = read_gate_library(cfg.gate_library);
  std::vector<ParamMapping> gates;
  for (const auto& name : cfg.gate_names) {
    auto it = std::find_if(library.begin(), library.end(), [&](const ParamMapping& m) { return m.name == name; });
    if (it != library.end()) {
      gates.push_back(*it);
      continue;
    }
    try {
      gates.push_back(builtin_mapping(name));
    } catch (const UnknownGate&) {
      std::string names;
      for (const auto& m : library) names += m.name + ", ";
      for (const auto& n : builtin_names()) names += n + ", ";
      names.resize(names.size() - 2);
      throw UnknownGate("unknown gate '" + name + "'; available: " + names);
    }
  }
  cfg.experiment.gates = std::move(gates);
}

}  // namespace memlogic
