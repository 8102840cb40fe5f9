// Acceptance checks: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memlogic/cli.hpp"
#include "memlogic/export.hpp"

using namespace memlogic;
namespace fs = std::filesystem;

namespace {

int g_failed = 0;

void report(const char* id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] %s %s: %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  if (!pass) ++g_failed;
}

std::string fmt_double(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DeviceModel noise_free() {
  DeviceModel m;
  auto& p = m.variability;
  p.lrs_sigma_c2c = p.lrs_sigma_d2d = p.hrs_sigma_c2c = p.hrs_sigma_d2d = 0.0;
  p.read_noise_lrs = p.read_noise_hrs = 0.0;
  return m;
}

void ac1() {
  int mismatches = 0;
  std::vector<int> possible;
  int id = 0;
  for (int g = 1; g >= 0; --g) {
    for (int te = 1; te >= 0; --te) {
      for (int be = 1; be >= 0; --be) {
        for (int i = 1; i >= 0; --i) {
          ++id;
          const int diff = te - be;
          const Process proc = diff > 0 ? Process::Set : diff < 0 ? Process::Reset : Process::None;
          const bool can_switch = g && ((diff > 0 && !i) || (diff < 0 && i));
          const auto c = classify_case(g, te, be, i);
          const auto& row = case_table()[std::size_t(id - 1)];
          const bool ok = c.case_id == id && c.te_minus_be == diff && c.process == proc &&
                          c.possible == can_switch && row.case_id == id && row.possible == can_switch;
          mismatches += !ok;
          if (c.possible) possible.push_back(c.case_id);
        }
      }
    }
  }
  const bool pass = mismatches == 0 && possible == std::vector<int>{4, 5};
  report("AC1", "case table", pass,
         std::to_string(16 - mismatches) + "/16 rows match, possible cases " +
             (possible.size() == 2 ? std::to_string(possible[0]) + "," + std::to_string(possible[1]) : "?"));
}

void ac2() {
  const std::map<std::string, std::function<bool(bool, bool)>> truth = {
      {"OR", [](bool p, bool q) { return p || q; }},
      {"AND", [](bool p, bool q) { return p && q; }},
      {"NIMP", [](bool p, bool q) { return !p && q; }},
      {"XOR", [](bool p, bool q) { return p != q; }},
      {"NOTP", [](bool p, bool) { return !p; }},
  };
  int ok = 0, total = 0;
  for (const auto& [name, f] : truth) {
    const auto m = builtin_mapping(name);
    for (int p = 0; p < 2; ++p) {
      for (int q = 0; q < 2; ++q) {
        ++total;
        ok += evaluate_mapping(m, p, q).output == f(p, q);
      }
    }
  }
  report("AC2", "builtin truth tables", ok == total, std::to_string(ok) + "/" + std::to_string(total) + " rows");
}

void ac3() {
  const auto t0 = std::chrono::steady_clock::now();
  int ok = 0;
  for (unsigned idx = 0; idx < 16; ++idx) {
    const auto target = TruthTable::from_index(idx);
    try {
      const auto m = synthesize_mapping(target);
      bool match = true;
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) match = match && evaluate_mapping(m, p, q).output == target(p, q);
      }
      ok += match;
    } catch (const std::exception&) {
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report("AC3", "functional completeness", ok == 16 && secs < 1.0,
         std::to_string(ok) + "/16 functions in " + fmt_double(secs, 3) + " s");
}

void ac4() {
  std::size_t trials = 0, failures = 0, errors = 0, flips = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    const auto res = run_1t1r_experiment(cfg);
    trials += res.report.trials();
    failures += res.report.failures();
    errors += res.report.errors();
    for (const auto& c : non_switching_report(res.traces)) flips += c.binary_changes;
  }
  report("AC4", "1T1R logic without failures", trials == 16000 && failures == 0 && errors == 0 && flips == 0,
         std::to_string(trials) + " trials, " + std::to_string(failures) + " failures, " + std::to_string(errors) +
             " errors, " + std::to_string(flips) + " non-switching flips");
}

void ac5() {
  const auto res = characterize(ExperimentConfig{}, 10);
  const double lo = 19.4 * 0.8, hi = 19.4 * 1.2;
  report("AC5", "HRS/LRS ratio", res.rows.size() == 1000 && res.mean_ratio >= lo && res.mean_ratio <= hi,
         "mean ratio " + fmt_double(res.mean_ratio) + " in [" + fmt_double(lo) + ", " + fmt_double(hi) + "]");
}

void ac6() {
  // Final resistances after the switching cases of a default gate run.
  const auto res = run_1t1r_experiment(ExperimentConfig{});
  std::vector<double> hrs, lrs;
  for (const auto& t : res.traces) {
    if (t.case_id == 5) hrs.push_back(t.final_resistance);
    if (t.case_id == 4) lrs.push_back(t.final_resistance);
  }
  if (hrs.size() < 2 || lrs.size() < 2) {
    report("AC6", "HRS spread", false, "no switching samples");
    return;
  }
  const auto h = summarize("HRS", hrs);
  const auto l = summarize("LRS", lrs);
  const double ratio = h.max / h.min;
  const bool pass = ratio >= 5.0 && ratio <= 20.0 && std::log(l.max / l.min) < std::log(ratio) && l.log_sd < h.log_sd;
  report("AC6", "HRS spread", pass,
         "HRS max/min " + fmt_double(ratio) + " over " + std::to_string(hrs.size()) + " RESETs, LRS max/min " +
             fmt_double(l.max / l.min) + ", log sd " + fmt_double(l.log_sd, 3) + " < " + fmt_double(h.log_sd, 3));
}

void ac7() {
  Rng rng{7};
  auto arr = make_array({TopologyKind::Standard1T1R, 2, 1}, noise_free(), rng);
  form_array(arr, rng);
  const std::vector<CellAddress> pair = {{0, 0}, {1, 0}};
  const LogicVoltages v;
  const double g_l = 1.0 / 5e3, g_h = 1.0 / 97e3;
  const double oracle[3] = {0.1 * 2 * g_h, 0.1 * (g_l + g_h), 0.1 * 2 * g_l};
  const std::vector<std::vector<bool>> inputs = {{false, false}, {true, false}, {true, true}};
  double worst = 0.0;
  std::string got;
  for (int k = 0; k < 3; ++k) {
    write_inputs(arr, pair, inputs[k], v, rng);
    const double i = scout_current(arr, pair, rng, v.v_read, v.v_g_read);
    worst = std::max(worst, std::abs(i / oracle[k] - 1.0));
    got += fmt_double(i * 1e6) + (k < 2 ? "/" : " uA");
  }
  ExperimentConfig cfg;
  cfg.ref_source = RefSource::Measured;
  const auto noisy = run_scouting_experiment(cfg);
  const bool inside = noisy.refs_inside_gaps() && noisy.gaps.read;
  report("AC7", "scouting gaps", worst <= 1e-3 && inside,
         "noise-free " + got + " (max rel err " + fmt_double(worst, 2) + "), measured refs inside gaps over " +
             std::to_string(cfg.cycles) + " cycles: " + (inside ? "yes" : "no"));
}

void ac8() {
  std::string detail;
  bool pass = true;
  struct Mode {
    const char* name;
    RefSource source;
    RefMode mode;
  };
  for (const Mode m : {Mode{"placed/split", RefSource::Placed, RefMode::Split},
                       Mode{"placed/insample", RefSource::Placed, RefMode::InSample},
                       Mode{"paper-refs", RefSource::Measured, RefMode::Split}}) {
    ExperimentConfig cfg;
    cfg.ref_source = m.source;
    cfg.ref_mode = m.mode;
    const auto res = run_scouting_experiment(cfg);
    std::size_t classes = 0;
    for (const auto& b : res.report.buckets) classes += b.trials > 0;
    const bool ok = res.report.failures() == 0 && res.report.errors() == 0 && classes == 14 &&
                    res.report.buckets.size() == 14;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : ", ") + m.name + " " + std::to_string(res.report.failures()) + "/" +
              std::to_string(res.report.trials());
  }
  report("AC8", "scouting truth tables", pass, detail + " failures");
}

constexpr std::uint64_t kOverlapSeeds = 40;

// Fraction of seeds whose popcount classes collide at this HRS spread.
double collision_rate(std::size_t n, double sigma) {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= kOverlapSeeds; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.device.variability.hrs_sigma_c2c = sigma;
    hits += run_n_input_scouting(cfg, n).overlap.has_value();
  }
  return double(hits) / double(kOverlapSeeds);
}

// Bisection for the spread at which collisions become the majority outcome.
double critical_sigma(std::size_t n) {
  double lo = 0.05, hi = 4.0;
  if (collision_rate(n, hi) < 0.5) return hi;
  for (int k = 0; k < 12; ++k) {
    const double mid = 0.5 * (lo + hi);
    (collision_rate(n, mid) >= 0.5 ? hi : lo) = mid;
  }
  return hi;
}

void ac9() {
  const double s2 = critical_sigma(2);
  const double s3 = critical_sigma(3);

  std::size_t overlaps = 0;
  std::string gap;
  for (std::uint64_t seed = 1; seed <= kOverlapSeeds; ++seed) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.device.variability.hrs_sigma_c2c = s2;
    cfg.ref_mode = RefMode::InSample;
    try {
      place_references(run_scouting_experiment(cfg).samples);
    } catch (const OverlapError& e) {
      if (overlaps++ == 0) gap = e.gap().name;
    }
  }
  report("AC9", "overlap detection", overlaps > 0 && s3 < s2,
         "critical hrs_sigma_c2c (collisions in half of " + std::to_string(kOverlapSeeds) + " seeds) n=3 " +
             fmt_double(s3, 3) + " < n=2 " + fmt_double(s2, 3) + ", place_references overlap errors at n=2 critical " +
             std::to_string(overlaps) + "/" + std::to_string(kOverlapSeeds) + (gap.empty() ? "" : " (first in " + gap + " gap)"));
}

void ac10() {
  const Pulse set{1.3, 0.0, 1.3, 1e-6};
  const Pulse read{0.5, 0.0, 1.3, 1e-6};
  const ArrayTopology std_topo{TopologyKind::Standard1T1R, 2, 2};
  const ArrayTopology pseudo{TopologyKind::PseudoCrossbar, 2, 2};
  const auto s = check_parallel_distinct_voltages(std_topo, {0, 0}, {1, 0}, set, read);
  const auto p = check_parallel_distinct_voltages(pseudo, {0, 0}, {0, 1}, set, read);

  // The pseudo-crossbar drive delivers both pulses in one step.
  LineDrive d;
  d.wl = {{0, 1.3}};
  d.sl = {{0, 1.3}, {1, 0.5}};
  d.bl = {{0, 0.0}};
  bool delivered = false;
  for (const auto& rp : resolve_drives(pseudo, d)) {
    if (rp.addr == CellAddress{0, 1}) delivered = rp.pulse.v_te == 0.5;
  }
  report("AC10", "topology constraint", !s && p && delivered,
         std::string("standard: ") + (s ? "allowed" : "violation (" + s.reason + ")") +
             ", pseudo-crossbar: " + (p ? "allowed" : "rejected"));
}

std::map<std::string, std::string> run_exports(const fs::path& dir, const std::string& threads) {
  fs::remove_all(dir);
  std::ostringstream out, err;
  for (const char* cmd : {"gate", "scouting", "characterize"}) {
    run_cli({cmd, "--seed", "5", "--threads", threads, "--format", "both", "--out", dir.string()}, out, err);
  }
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
  return files;
}

void ac11() {
  const auto base = fs::temp_directory_path() / "memlogic_acceptance";
  const auto a = run_exports(base / "a", "1");
  const auto b = run_exports(base / "b", "1");
  const auto c = run_exports(base / "c", "4");
  fs::remove_all(base);

  ExperimentConfig seq;
  seq.seed = 5;
  seq.device.variability.hrs_sigma_c2c = 1.2;
  ExperimentConfig par = seq;
  par.threads = 4;
  const bool same_logic = traces_table(run_1t1r_experiment(seq).traces).to_csv() ==
                          traces_table(run_1t1r_experiment(par).traces).to_csv();
  const bool same_scout = currents_table(run_scouting_experiment(seq).samples).to_csv() ==
                          currents_table(run_scouting_experiment(par).samples).to_csv();
  report("AC11", "reproducibility", !a.empty() && a == b && a == c && same_logic && same_scout,
         std::to_string(a.size()) + " export files byte-identical across reruns: " + (a == b ? "yes" : "no") +
             ", 1 vs 4 threads: " + (a == c && same_logic && same_scout ? "yes" : "no"));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)()>> checks = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},  {"AC6", ac6},
      {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}};
  for (const auto& [id, fn] : checks) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, "exception", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", g_failed, checks.size());
  return g_failed == 0 ? 0 : 1;
}
