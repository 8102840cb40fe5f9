#include "memlogic/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "memlogic/config.hpp"
#include "memlogic/export.hpp"

namespace memlogic {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> cycles;
  std::optional<std::size_t> threads;
  std::string preset;
  std::string out_dir;
  std::string format;
  std::vector<std::string> settings;  // key=value
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, {}, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Config file, then --preset and --set lines, then typed flags; the output
/// directory falls back to the environment before the config file.
RunConfig build_config(const GlobalOptions& g) {
  std::string text = g.config_path.empty() ? std::string() : read_file(g.config_path);
  const std::string source = g.config_path.empty() ? "<command line>" : g.config_path;
  if (!g.preset.empty()) text += "\npreset = " + g.preset + "\n";
  RunConfig cfg = parse_config(text, source);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.experiment.seed = *g.seed;
  if (g.cycles) {
    if (*g.cycles < 1) throw UsageError("--cycles must be >= 1");
    cfg.experiment.cycles = *g.cycles;
  }
  if (g.threads) cfg.experiment.threads = *g.threads;
  if (!g.format.empty()) cfg.format = parse_export_format(g.format);
  if (!g.out_dir.empty()) {
    cfg.output_dir = g.out_dir;
  } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    cfg.output_dir = env;
  }
  return cfg;
}

class Session {
 public:
  Session(RunConfig cfg, std::ostream& out) : cfg_(std::move(cfg)), out_(out) {}

  void write(const Table& t) {
    for (const auto& p : write_table(t, cfg_.output_dir, cfg_.format)) fmt::print(out_, "wrote {}\n", p.string());
  }

  RunConfig& cfg() { return cfg_; }
  std::ostream& out() { return out_; }

 private:
  RunConfig cfg_;
  std::ostream& out_;
};

std::string micro(double amps) { return fmt::format("{:.3f} uA", amps * 1e6); }
std::string kilo(double ohms) { return fmt::format("{:.2f} kOhm", ohms / 1e3); }

Table renamed(Table t, std::string name) {
  t.name = std::move(name);
  return t;
}

int cmd_characterize(Session& s) {
  auto& cfg = s.cfg();
  const auto res = characterize(cfg.experiment, cfg.characterize_cells);
  auto& out = s.out();
  fmt::print(out, "characterized {} cells x {} cycles\n", cfg.characterize_cells, cfg.experiment.cycles);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& d = res.summaries[k];
    fmt::print(out, "{:<4} median {}  p1 {}  p99 {}  min {}  max {}\n", d.label, kilo(d.median), kilo(d.p1),
               kilo(d.p99), kilo(d.min), kilo(d.max));
  }
  fmt::print(out, "mean HRS/LRS ratio {:.3f}\n", res.mean_ratio);
  fmt::print(out, "switching failures {}\n", res.switch_failures);

  s.write(renamed(characterization_table(res.rows), "characterize_resistances"));
  s.write(summary_table("characterize_summary", res.summaries));
  Table stats;
  stats.name = "characterize_stats";
  stats.columns = {"cells", "cycles", "mean_ratio", "mean_cycle_ratio", "switch_failures"};
  stats.rows.push_back({static_cast<std::int64_t>(cfg.characterize_cells),
                        static_cast<std::int64_t>(cfg.experiment.cycles), res.mean_ratio, res.mean_cycle_ratio,
                        static_cast<std::int64_t>(res.switch_failures)});
  stats.single_object = true;
  s.write(stats);
  return res.switch_failures == 0 ? kExitOk : kExitFailures;
}

int cmd_gate(Session& s, const std::vector<std::string>& names, const std::string& library) {
  auto& cfg = s.cfg();
  if (!names.empty()) cfg.gate_names = names;
  if (!library.empty()) cfg.gate_library = library;
  resolve_gates(cfg);
  const auto res = run_1t1r_experiment(cfg.experiment);
  auto& out = s.out();

  for (const auto& gate : cfg.experiment.gates) {
    fmt::print(out, "{}  G={} TE={} BE={} I={}\n", gate.name, to_token(gate.g), to_token(gate.te),
               to_token(gate.be), to_token(gate.i));
    for (int combo = 0; combo < 4; ++combo) {
      const bool p = combo & 2, q = combo & 1;
      const std::string label = fmt::format("{}{}", int(p), int(q));
      const auto* b = res.report.find(gate.name, label);
      std::optional<bool> seen;
      bool mixed = false;
      for (const auto& t : res.traces) {
        if (t.gate != gate.name || t.p != p || t.q != q) continue;
        if (seen && *seen != t.output_bit) mixed = true;
        seen = t.output_bit;
      }
      const std::string observed = !seen ? "-" : mixed ? "x" : (*seen ? "1" : "0");
      const bool expected = truth_table_of(gate)(p, q);
      fmt::print(out, "  {} p={} q={} case {:>2} -> out {} expected {}  failures {}/{}  errors {}\n",
                 gate.name, int(p), int(q), evaluate_mapping(gate, p, q).case_id, observed, int(expected),
                 b ? b->failures : 0, b ? b->trials : 0, b ? b->errors : 0);
    }
  }
  const auto cases = non_switching_report(res.traces);
  std::size_t flips = 0;
  for (const auto& c : cases) flips += c.binary_changes;
  fmt::print(out, "total trials {}  failures {}  errors {}  non-switching state flips {}\n", res.report.trials(),
             res.report.failures(), res.report.errors(), flips);
  if (const auto& f = res.report.first_failure) {
    fmt::print(out, "first failure {} {} cycle {} stream {:#018x}\n", f->group, f->combo, f->cycle,
               f->stream_seed);
  }
  for (const auto& e : res.errors) fmt::print(out, "error {} {} cycle {}: {}\n", e.group, e.combo, e.cycle, e.message);

  s.write(renamed(traces_table(res.traces), "gate_traces"));
  s.write(summary_table("gate_summary", res.summaries));
  s.write(failures_table("gate_failures", res.report));
  s.write(renamed(nonswitching_table(cases), "gate_nonswitching"));
  return res.report.failures() == 0 && res.report.errors() == 0 ? kExitOk : kExitFailures;
}

int cmd_synthesize(Session& s, const std::string& output, bool with_builtins) {
  auto& out = s.out();
  const auto lib = with_builtins ? default_gate_library() : synthesized_library();
  for (const auto& m : lib) {
    fmt::print(out, "{:<8} G={:<2} TE={:<2} BE={:<2} I={:<2} -> {}\n", m.name, to_token(m.g), to_token(m.te),
               to_token(m.be), to_token(m.i), truth_table_of(m).str());
  }
  const std::filesystem::path path =
      output.empty() ? std::filesystem::path(s.cfg().output_dir) / "gate_library.csv" : std::filesystem::path(output);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path(), "cannot create directory: " + ec.message());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(path, "cannot open for writing");
  f << format_gate_library(lib);
  if (!f) throw IoError(path, "write failed");
  fmt::print(out, "wrote {} ({} mappings)\n", path.string(), lib.size());
  return kExitOk;
}

void print_gap(std::ostream& out, const Gap& g) {
  fmt::print(out, "gap {:<4} {} .. {}  width {}  margin {:.4f}{}\n", g.name, micro(g.lower_max), micro(g.upper_min),
             micro(g.width()), g.margin(), g.open() ? "" : "  OVERLAP");
}

int cmd_scouting_n(Session& s, std::size_t n) {
  const auto res = run_n_input_scouting(s.cfg().experiment, n);
  auto& out = s.out();
  fmt::print(out, "{}-cell scouting, {} cycles per combination\n", n, s.cfg().experiment.cycles);
  for (std::size_t k = 0; k < res.by_popcount.size(); ++k) {
    const auto d = summarize("popcount" + std::to_string(k), res.by_popcount[k]);
    fmt::print(out, "popcount {} samples {}  min {}  median {}  max {}\n", k, d.count, micro(d.min),
               micro(d.median), micro(d.max));
  }
  for (const auto& g : res.gaps) print_gap(out, g);
  for (std::size_t k = 0; k < res.thresholds.size(); ++k) {
    fmt::print(out, "threshold {} {:.6e} A ({})\n", k + 1, res.thresholds[k], micro(res.thresholds[k]));
  }
  if (res.overlap) fmt::print(out, "overlap between popcount classes at gap {}\n", res.overlap->name);
  if (res.write_errors) fmt::print(out, "write errors {}\n", res.write_errors);
  s.write(renamed(popcount_table(res), "scouting_popcount"));
  std::vector<DistributionSummary> sums;
  for (std::size_t k = 0; k < res.by_popcount.size(); ++k) {
    sums.push_back(summarize("popcount" + std::to_string(k), res.by_popcount[k]));
  }
  s.write(summary_table("scouting_popcount_summary", sums));
  return res.overlap || res.write_errors ? kExitFailures : kExitOk;
}

int cmd_scouting(Session& s, const std::vector<std::string>& ops, const std::string& refs,
                 const std::string& ref_mode, std::size_t n) {
  auto& cfg = s.cfg();
  if (!ops.empty()) {
    cfg.experiment.ops.clear();
    for (const auto& op : ops) cfg.experiment.ops.push_back(parse_scout_op(op));
  }
  if (!refs.empty()) apply_setting(cfg, "experiment.refs", refs);
  if (!ref_mode.empty()) apply_setting(cfg, "experiment.ref_mode", ref_mode);
  if (n == 0) n = cfg.n_inputs;
  if (n != 2) return cmd_scouting_n(s, n);

  const auto res = run_scouting_experiment(cfg.experiment);
  auto& out = s.out();
  fmt::print(out, "references ({}): I_read {:.6e} A ({})  I_or {:.6e} A ({})  I_and {:.6e} A ({})\n",
             res.ref_source == RefSource::Measured ? "paper-refs" : "placed", res.refs.i_read, micro(res.refs.i_read),
             res.refs.i_or, micro(res.refs.i_or), res.refs.i_and, micro(res.refs.i_and));
  if (res.gaps.read) print_gap(out, *res.gaps.read);
  print_gap(out, res.gaps.or_gap);
  print_gap(out, res.gaps.and_gap);
  fmt::print(out, "references inside gaps: {}\n", res.refs_inside_gaps() ? "yes" : "no");
  for (const auto& g : res.overlapping_gaps) fmt::print(out, "overlap in {} gap: dependent ops fail\n", g);

  for (ScoutOp op : cfg.experiment.ops) {
    std::size_t trials = 0, failures = 0;
    for (const auto& b : res.report.buckets) {
      if (b.group != to_string(op)) continue;
      trials += b.trials;
      failures += b.failures;
    }
    fmt::print(out, "{}  failures {}/{}\n", to_string(op), failures, trials);
    for (const auto& b : res.report.buckets) {
      if (b.group != to_string(op)) continue;
      fmt::print(out, "  {} {} -> expected {}  failures {}/{}  errors {}\n", b.group, b.combo,
                 int(scout_truth(op, b.combo)), b.failures, b.trials, b.errors);
    }
  }
  if (const auto& f = res.report.first_failure) {
    fmt::print(out, "first failure {} {} cycle {} stream {:#018x}\n", f->group, f->combo, f->cycle,
               f->stream_seed);
  }

  s.write(renamed(currents_table(res.samples), "scouting_currents"));
  s.write(renamed(refs_table(res.refs), "scouting_refs"));
  s.write(summary_table("scouting_summary", res.summaries));
  s.write(failures_table("scouting_failures", res.report));
  s.write(renamed(gaps_table(res.gaps), "scouting_gaps"));
  return res.report.failures() == 0 && res.report.errors() == 0 && res.errors.empty() ? kExitOk : kExitFailures;
}

std::vector<double> sweep_values(std::optional<double> from, std::optional<double> to, std::size_t steps,
                                 const std::vector<double>& values) {
  if (!values.empty()) return values;
  if (!from || !to) throw UsageError("sweep needs --from and --to, or --values");
  if (steps == 0) throw UsageError("sweep range is empty (--steps 0)");
  if (steps == 1) return {*from};
  std::vector<double> out;
  for (std::size_t k = 0; k < steps; ++k) out.push_back(*from + (*to - *from) * double(k) / double(steps - 1));
  return out;
}

int cmd_sweep(Session& s, const std::string& parameter, const std::vector<double>& values) {
  if (values.empty()) throw UsageError("sweep range is empty");
  const auto points = run_sweep(s.cfg().experiment, parameter, values);
  auto& out = s.out();
  fmt::print(out, "{:>12} {:>12} {:>12} {:>10} {:>10} {:>10} {:>10} {:>14}\n", parameter, "logic_rate",
             "scout_rate", "or_margin", "and_margin", "ideal_or", "ideal_and", "ideal_xor_win");
  bool clean = true;
  for (const auto& p : points) {
    fmt::print(out, "{:>12.4g} {:>12.4g} {:>12.4g} {:>10.4f} {:>10.4f} {:>10.4f} {:>10.4f} {:>14}\n", p.value,
               p.logic.overall_rate(), p.scouting.overall_rate(), p.or_margin.value_or(0.0),
               p.and_margin.value_or(0.0), p.ideal_or_margin, p.ideal_and_margin, micro(p.ideal_xor_window));
    clean = clean && p.logic.failures() == 0 && p.logic.errors() == 0 && p.scouting.failures() == 0 &&
            p.scouting.errors() == 0;
  }
  const double first = points.front().logic.overall_rate() + points.front().scouting.overall_rate();
  const double last = points.back().logic.overall_rate() + points.back().scouting.overall_rate();
  fmt::print(out, "failure trend (last vs first point): {}\n",
             last > first ? "increasing" : last == first ? "flat" : "decreasing");
  s.write(sweep_table(parameter, points));
  return clean ? kExitOk : kExitFailures;
}

int cmd_cases(Session& s) {
  auto& out = s.out();
  Table t;
  t.name = "cases";
  t.columns = {"case_id", "g", "te", "be", "i", "te_minus_be", "process", "possible"};
  fmt::print(out, "{:>4} {:>2} {:>3} {:>3} {:>2} {:>6} {:<6} {}\n", "case", "G", "TE", "BE", "I", "TE-BE",
             "proc", "possible");
  for (const auto& c : case_table()) {
    fmt::print(out, "{:>4} {:>2} {:>3} {:>3} {:>2} {:>6} {:<6} {}\n", c.case_id, int(c.g), int(c.te), int(c.be),
               int(c.i), c.te_minus_be, to_string(c.process), c.possible ? "yes" : "no");
    t.rows.push_back({std::int64_t{c.case_id}, std::int64_t{c.g}, std::int64_t{c.te}, std::int64_t{c.be},
                      std::int64_t{c.i}, std::int64_t{c.te_minus_be}, std::string(to_string(c.process)),
                      std::string(c.possible ? "yes" : "no")});
  }
  s.write(t);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Behavioral simulator for 1T1R memristor in-memory logic", "memlogic"};
  app.require_subcommand(1, 1);
  GlobalOptions g;
  app.add_option("config", g.config_path, "Config file (key = value lines)");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--cycles", g.cycles, "Cycles per input combination");
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware)");
  app.add_option("--preset", g.preset, "Device preset (table3-logic, fig1f-nominal)");
  app.add_option("--out", g.out_dir, std::string("Output directory (else $") + kOutDirEnv + ", config, ./out)");
  app.add_option("--format", g.format, "Export format: csv, json or both");
  app.add_option("--set", g.settings, "Extra config setting key=value (repeatable)");

  auto* characterize_cmd = app.add_subcommand("characterize", "SET/RESET cycling of independent cells");
  std::optional<std::size_t> cells;
  characterize_cmd->add_option("--cells", cells, "Number of cells");

  auto* gate_cmd = app.add_subcommand("gate", "Run 1T1R logic gates");
  std::vector<std::string> gate_names;
  std::string library;
  gate_cmd->add_option("names", gate_names, "Gate names (builtin or from --library)");
  gate_cmd->add_option("--library", library, "Gate library CSV (name,g,te,be,i)");

  auto* synth_cmd = app.add_subcommand("synthesize", "Write a gate library covering all 16 functions");
  std::string synth_output;
  bool with_builtins = false;
  synth_cmd->add_option("-o,--output", synth_output, "Library file (default <out>/gate_library.csv)");
  synth_cmd->add_flag("--with-builtins", with_builtins, "Prepend the builtin mappings");

  auto* scout_cmd = app.add_subcommand("scouting", "Run scouting logic");
  std::vector<std::string> ops;
  std::string refs, ref_mode;
  std::size_t n_inputs = 0;
  scout_cmd->add_option("ops", ops, "Operations: read, and, or, xor");
  scout_cmd->add_option("--refs", refs, "placed or paper")->check(CLI::IsMember({"placed", "paper", "paper-refs"}));
  scout_cmd->add_option("--ref-mode", ref_mode, "split or insample")->check(CLI::IsMember({"split", "insample"}));
  scout_cmd->add_option("--n", n_inputs, "Cells read in parallel (popcount report when not 2)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one device parameter");
  std::string parameter;
  std::optional<double> from, to;
  std::size_t steps = 5;
  std::vector<double> values;
  sweep_cmd->add_option("parameter", parameter, "Device field name or hrs_lrs_ratio")->required();
  sweep_cmd->add_option("--from", from, "First value");
  sweep_cmd->add_option("--to", to, "Last value");
  sweep_cmd->add_option("--steps", steps, "Number of points");
  sweep_cmd->add_option("--values", values, "Explicit values")->delimiter(',');

  auto* cases_cmd = app.add_subcommand("cases", "Print the G/TE/BE/I case table");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = build_config(g);
    if (cells) cfg.characterize_cells = *cells;
    cfg.experiment.validate();
    Session s(std::move(cfg), out);
    if (characterize_cmd->parsed()) return cmd_characterize(s);
    if (gate_cmd->parsed()) return cmd_gate(s, gate_names, library);
    if (synth_cmd->parsed()) return cmd_synthesize(s, synth_output, with_builtins);
    if (scout_cmd->parsed()) return cmd_scouting(s, ops, refs, ref_mode, n_inputs);
    if (sweep_cmd->parsed()) return cmd_sweep(s, parameter, sweep_values(from, to, steps, values));
    if (cases_cmd->parsed()) return cmd_cases(s);
    err << "no subcommand\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownGate& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitFailures;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "experiment error: " << e.what() << "\n";
    return kExitFailures;
  }
}

}  // namespace memlogic
