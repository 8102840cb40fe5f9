#include "memlogic/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace memlogic {

namespace {

constexpr std::array<const char*, 4> kPairClasses = {"00", "01", "10", "11"};

std::string combo_label(bool p, bool q) { return std::string{p ? '1' : '0', q ? '1' : '0'}; }

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested == 0 ? std::max(1U, std::thread::hardware_concurrency()) : requested;
  return std::min(n, jobs);
}

/// Runs job(k) for k in [0, jobs) on up to `threads` workers.
template <class Job>
void parallel_for(std::size_t jobs, std::size_t threads, Job job) {
  const std::size_t workers = worker_count(threads, jobs);
  if (workers <= 1) {
    for (std::size_t k = 0; k < jobs; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(jobs);
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs; k = next++) {
        try {
          job(k);
        } catch (...) {
          failures[k] = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

struct GateRun {
  std::vector<GateTrace> traces;
  std::vector<FailureBucket> buckets;
  std::vector<ExperimentError> errors;
  std::optional<FirstFailure> first_failure;
};

GateRun run_gate(const ExperimentConfig& cfg, std::size_t gi) {
  const auto& gate = cfg.gates[gi];
  const std::uint64_t gate_key = label_key(gate.name);
  Rng cell_rng = make_stream(cfg.seed, {label_key("cells"), gate_key, gi});
  MemoryArray array = make_array(cfg.topology, cfg.device, cell_rng);
  form_array(array, cell_rng);

  GateRun run;
  for (int combo = 0; combo < 4; ++combo) {
    const bool p = combo >> 1;
    const bool q = combo & 1;
    FailureBucket bucket{gate.name, combo_label(p, q)};
    for (std::size_t cycle = 0; cycle < cfg.cycles; ++cycle) {
      const std::uint64_t sid =
          stream_id(cfg.seed, {label_key("trial"), gate_key, gi, std::uint64_t(combo), cycle});
      Rng rng{sid};
      const CellAddress addr =
          cfg.rotate_cells ? array.address_of(cycle % array.topology().size()) : CellAddress{0, 0};
      ++bucket.trials;
      try {
        GateStep step{gate, p, q};
        auto traces = run_cascade(array, addr, std::span(&step, 1), cfg.voltages, rng);
        GateTrace t = std::move(traces.front());
        t.cycle = cycle;
        if (t.output_bit != t.expected_bit) {
          ++bucket.failures;
          if (!run.first_failure) run.first_failure = FirstFailure{gate.name, bucket.combo, cycle, sid};
        }
        run.traces.push_back(std::move(t));
      } catch (const CascadeError& e) {
        ++bucket.errors;
        run.errors.push_back({gate.name, bucket.combo, cycle, e.what()});
      }
    }
    run.buckets.push_back(std::move(bucket));
  }
  return run;
}

std::vector<CellAddress> parallel_addresses(const ArrayTopology& topo, std::size_t n) {
  std::vector<CellAddress> addrs;
  for (std::size_t k = 0; k < n; ++k) {
    addrs.push_back(topo.kind == TopologyKind::Standard1T1R ? CellAddress{k, 0} : CellAddress{0, k});
  }
  return addrs;
}

ArrayTopology topology_for(const ArrayTopology& base, std::size_t n) {
  ArrayTopology t = base;
  if (t.kind == TopologyKind::Standard1T1R) t.rows = std::max(t.rows, n);
  else t.cols = std::max(t.cols, n);
  return t;
}

std::vector<bool> class_bits(std::string_view cls) {
  std::vector<bool> bits;
  for (char c : cls) bits.push_back(c == '1');
  return bits;
}

bool op_uses_gap(ScoutOp op, std::string_view gap) {
  switch (op) {
    case ScoutOp::Read: return gap == "read";
    case ScoutOp::Or: return gap == "or";
    case ScoutOp::And: return gap == "and";
    case ScoutOp::Xor: return gap == "or" || gap == "and";
  }
  return false;
}

void summarize_classes(std::span<const CurrentSample> samples, std::vector<DistributionSummary>& out) {
  for (const char* cls : {"00", "01", "10", "11", "0", "1"}) {
    std::vector<double> xs;
    for (const auto& s : samples) {
      if (s.input_class == cls) xs.push_back(s.current);
    }
    if (xs.empty()) continue;
    const bool single = std::string_view(cls).size() == 1;
    out.push_back(summarize(std::string(single ? "read/" : "pair/") + cls, xs));
  }
}

}  // namespace

double nearest_rank(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank of empty data");
  const auto n = sorted.size();
  auto rank = static_cast<std::size_t>(std::ceil(p * double(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

DistributionSummary summarize(std::string label, std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("cannot summarize empty sample set '" + label + "'");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  DistributionSummary s;
  s.label = std::move(label);
  s.count = xs.size();
  s.min = xs.front();
  s.max = xs.back();
  s.p1 = nearest_rank(xs, 0.01);
  s.p25 = nearest_rank(xs, 0.25);
  s.median = nearest_rank(xs, 0.50);
  s.p75 = nearest_rank(xs, 0.75);
  s.p99 = nearest_rank(xs, 0.99);
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(xs.size());
  if (xs.size() > 1 && xs.front() > 0.0) {
    double m = 0.0;
    for (double x : samples) m += std::log(x);
    m /= double(xs.size());
    double ss = 0.0;
    for (double x : samples) ss += (std::log(x) - m) * (std::log(x) - m);
    s.log_sd = std::sqrt(ss / double(xs.size() - 1));
  }
  return s;
}

std::size_t FailureReport::trials() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.trials;
  return n;
}

std::size_t FailureReport::failures() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.failures;
  return n;
}

std::size_t FailureReport::errors() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.errors;
  return n;
}

double FailureReport::overall_rate() const {
  const auto t = trials();
  return t ? double(failures()) / double(t) : 0.0;
}

const FailureBucket* FailureReport::find(std::string_view group, std::string_view combo) const {
  for (const auto& b : buckets) {
    if (b.group == group && b.combo == combo) return &b;
  }
  return nullptr;
}

void ExperimentConfig::validate() const {
  if (cycles < 1) throw std::invalid_argument("cycles must be >= 1");
  device.variability.validate();
  device.transistor.validate();
  topology.validate();
}

LogicExperimentResult run_1t1r_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<GateRun> runs(config.gates.size());
  parallel_for(config.gates.size(), config.threads,
               [&](std::size_t gi) { runs[gi] = run_gate(config, gi); });

  LogicExperimentResult result;
  for (auto& run : runs) {
    for (const auto& b : run.buckets) {
      std::vector<double> finals;
      for (const auto& t : run.traces) {
        if (t.gate == b.group && combo_label(t.p, t.q) == b.combo) finals.push_back(t.final_resistance);
      }
      if (!finals.empty()) result.summaries.push_back(summarize(b.group + "/" + b.combo, finals));
    }
    if (!result.report.first_failure && run.first_failure) result.report.first_failure = run.first_failure;
    std::move(run.buckets.begin(), run.buckets.end(), std::back_inserter(result.report.buckets));
    std::move(run.traces.begin(), run.traces.end(), std::back_inserter(result.traces));
    std::move(run.errors.begin(), run.errors.end(), std::back_inserter(result.errors));
  }
  return result;
}

bool ScoutingExperimentResult::refs_inside_gaps() const {
  if (gaps.read && !gaps.read->contains(refs.i_read)) return false;
  return gaps.or_gap.contains(refs.i_or) && gaps.and_gap.contains(refs.i_and);
}

ScoutingExperimentResult run_scouting_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto topo = topology_for(config.topology, 2);
  Rng cell_rng = make_stream(config.seed, {label_key("scout-cells")});
  MemoryArray array = make_array(topo, config.device, cell_rng);
  form_array(array, cell_rng);
  const auto pair = parallel_addresses(topo, 2);
  const bool with_read =
      std::find(config.ops.begin(), config.ops.end(), ScoutOp::Read) != config.ops.end();
  const auto& v = config.voltages;

  ScoutingExperimentResult res;
  std::vector<std::uint64_t> sample_streams;
  for (std::size_t cycle = 0; cycle < config.cycles; ++cycle) {
    for (const char* cls_c : kPairClasses) {
      const std::string cls = cls_c;
      const std::uint64_t sid = stream_id(config.seed, {label_key("scout"), cycle, label_key(cls)});
      Rng rng{sid};
      try {
        write_inputs(array, pair, class_bits(cls), v, rng);
      } catch (const InitFailure& e) {
        res.errors.push_back({"write", cls, cycle, e.what()});
        continue;
      }
      res.samples.push_back({cls, scout_current(array, pair, rng, v.v_read, v.v_g_read), cycle});
      sample_streams.push_back(sid);
      if (with_read) {
        res.samples.push_back({cls.substr(0, 1),
                               scout_current(array, std::span(pair).first(1), rng, v.v_read, v.v_g_read),
                               cycle});
        sample_streams.push_back(sid);
      }
    }
  }

  const bool split =
      config.ref_source == RefSource::Placed && config.ref_mode == RefMode::Split && config.cycles > 1;
  const std::size_t half = config.cycles / 2;
  auto in_evaluation = [&](std::size_t cycle) { return !split || cycle >= half; };
  std::vector<CurrentSample> training;
  std::vector<std::size_t> evaluation;  // indices into res.samples
  for (std::size_t k = 0; k < res.samples.size(); ++k) {
    const auto& s = res.samples[k];
    if (!split || s.cycle < half) training.push_back(s);
    if (in_evaluation(s.cycle)) evaluation.push_back(k);
  }

  res.gaps = measure_gaps(res.samples);
  res.ref_source = config.ref_source;
  if (config.ref_source == RefSource::Measured) {
    res.refs = ReferenceSet::measured_refs();
    res.training_gaps = res.gaps;
  } else {
    res.training_gaps = measure_gaps(training);
    res.refs = references_from_gaps(res.training_gaps);
    if (res.training_gaps.read && !res.training_gaps.read->open()) res.overlapping_gaps.push_back("read");
    if (!res.training_gaps.or_gap.open()) res.overlapping_gaps.push_back("or");
    if (!res.training_gaps.and_gap.open()) res.overlapping_gaps.push_back("and");
  }

  for (ScoutOp op : config.ops) {
    const bool overlapped = std::any_of(res.overlapping_gaps.begin(), res.overlapping_gaps.end(),
                                        [&](const std::string& g) { return op_uses_gap(op, g); });
    const std::vector<std::string> classes =
        op == ScoutOp::Read ? std::vector<std::string>{"0", "1"}
                            : std::vector<std::string>(kPairClasses.begin(), kPairClasses.end());
    for (const auto& cls : classes) {
      FailureBucket b{std::string(to_string(op)), cls};
      for (std::size_t k : evaluation) {
        const auto& s = res.samples[k];
        if (s.input_class != cls) continue;
        ++b.trials;
        if (overlapped || classify(s.current, res.refs, op) != scout_truth(op, cls)) {
          ++b.failures;
          if (!res.report.first_failure) {
            res.report.first_failure = FirstFailure{b.group, cls, s.cycle, sample_streams[k]};
          }
        }
      }
      // A failed write loses the pair sample and the READ sample of its first cell.
      for (const auto& e : res.errors) {
        const bool hit = op == ScoutOp::Read ? e.combo.substr(0, 1) == cls : e.combo == cls;
        if (hit && in_evaluation(e.cycle)) {
          ++b.errors;
          ++b.trials;
        }
      }
      res.report.buckets.push_back(std::move(b));
    }
  }
  summarize_classes(res.samples, res.summaries);
  return res;
}

NInputResult run_n_input_scouting(const ExperimentConfig& config, std::size_t n) {
  config.validate();
  if (n < 2) throw std::invalid_argument("n-input scouting needs n >= 2");
  if (n > 16) throw std::invalid_argument("n-input scouting supports at most 16 cells");
  const auto topo = topology_for(config.topology, n);
  Rng cell_rng = make_stream(config.seed, {label_key("scout-cells"), n});
  MemoryArray array = make_array(topo, config.device, cell_rng);
  form_array(array, cell_rng);
  const auto addrs = parallel_addresses(topo, n);

  NInputResult res;
  res.n = n;
  res.by_popcount.assign(n + 1, {});
  for (std::size_t cycle = 0; cycle < config.cycles; ++cycle) {
    for (std::size_t combo = 0; combo < (std::size_t{1} << n); ++combo) {
      Rng rng = make_stream(config.seed, {label_key("scout-n"), n, cycle, combo});
      std::vector<bool> bits(n);
      for (std::size_t k = 0; k < n; ++k) bits[k] = (combo >> (n - 1 - k)) & 1U;
      try {
        write_inputs(array, addrs, bits, config.voltages, rng);
      } catch (const InitFailure&) {
        ++res.write_errors;
        continue;
      }
      const auto pop = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
      res.by_popcount[pop].push_back(
          scout_current(array, addrs, rng, config.voltages.v_read, config.voltages.v_g_read));
    }
  }
  res.gaps = popcount_gaps(res.by_popcount);
  try {
    res.thresholds = extend_n_inputs(n, res.by_popcount);
  } catch (const OverlapError& e) {
    res.overlap = e.gap();
  }
  return res;
}

std::vector<NonSwitchingCase> non_switching_report(std::span<const GateTrace> traces) {
  std::vector<NonSwitchingCase> out;
  for (int id : kNonSwitchingCases) {
    NonSwitchingCase c;
    c.case_id = id;
    std::vector<double> init, fin;
    for (const auto& t : traces) {
      if (t.case_id != id) continue;
      ++c.count;
      if (t.output_bit != t.i) ++c.binary_changes;
      if (t.final_state_resistance != t.init_state_resistance) ++c.state_changes;
      init.push_back(t.init_resistance);
      fin.push_back(t.final_resistance);
    }
    if (!fin.empty()) {
      c.init = summarize("case" + std::to_string(id) + "/init", init);
      c.final = summarize("case" + std::to_string(id) + "/final", fin);
      std::vector<double> rel(fin.size());
      for (std::size_t k = 0; k < fin.size(); ++k) rel[k] = fin[k] / init[k] - 1.0;
      double mean = 0.0;
      for (double x : rel) mean += x;
      mean /= double(rel.size());
      double ss = 0.0;
      for (double x : rel) ss += (x - mean) * (x - mean);
      c.variation = rel.size() > 1 ? std::sqrt(ss / double(rel.size() - 1)) : 0.0;
    }
    out.push_back(std::move(c));
  }
  return out;
}

CharacterizationResult characterize(const ExperimentConfig& config, std::size_t cells) {
  config.validate();
  if (cells < 1) throw std::invalid_argument("characterization needs at least one cell");
  const auto& model = config.device;
  const auto& v = config.voltages;
  CharacterizationResult res;
  std::vector<std::vector<double>> lrs(cells), hrs(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    Rng cell_rng = make_stream(config.seed, {label_key("char-cell"), k});
    MemristorCell cell = sample_fresh_cell(model.variability, cell_rng, k);
    cell = form_with_ramp(cell, model, cell_rng).cell;
    for (std::size_t cycle = 0; cycle < config.cycles; ++cycle) {
      Rng rng = make_stream(config.seed, {label_key("char"), k, cycle});
      auto reset = apply_pulse(cell, v.reset_pulse(), model, rng);
      cell = reset.cell;
      if (cell.state != CellState::Hrs) ++res.switch_failures;
      const double r_hrs = read_resistance(cell, v.v_read, v.v_g_read, model, rng).resistance;
      auto set = apply_pulse(cell, v.set_pulse(), model, rng);
      cell = set.cell;
      if (cell.state != CellState::Lrs) ++res.switch_failures;
      const double r_lrs = read_resistance(cell, v.v_read, v.v_g_read, model, rng).resistance;
      res.rows.push_back({k, cycle, r_lrs, r_hrs});
      lrs[k].push_back(r_lrs);
      hrs[k].push_back(r_hrs);
    }
  }
  std::vector<double> all_lrs, all_hrs;
  double ratio_sum = 0.0;
  for (const auto& row : res.rows) {
    all_lrs.push_back(row.r_lrs);
    all_hrs.push_back(row.r_hrs);
    ratio_sum += row.r_hrs / row.r_lrs;
  }
  res.summaries.push_back(summarize("LRS", all_lrs));
  res.summaries.push_back(summarize("HRS", all_hrs));
  for (std::size_t k = 0; k < cells; ++k) {
    res.summaries.push_back(summarize("cell" + std::to_string(k) + "/LRS", lrs[k]));
    res.summaries.push_back(summarize("cell" + std::to_string(k) + "/HRS", hrs[k]));
  }
  res.mean_ratio = res.summaries[1].mean / res.summaries[0].mean;
  res.mean_cycle_ratio = ratio_sum / double(res.rows.size());
  return res;
}

std::array<double, 3> ideal_pair_currents(const VariabilityParams& p, double v_read) {
  const double g_lrs = 1.0 / p.lrs_median;
  const double g_hrs = 1.0 / p.hrs_median;
  return {v_read * 2.0 * g_hrs, v_read * (g_lrs + g_hrs), v_read * 2.0 * g_lrs};
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                  std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sweep range is empty");
  if (parameter != "hrs_lrs_ratio") (void)get_field(config.device.variability, parameter);
  std::vector<SweepPoint> points;
  for (double value : values) {
    ExperimentConfig cfg = config;
    auto& vp = cfg.device.variability;
    if (parameter == "hrs_lrs_ratio") vp.hrs_median = value * vp.lrs_median;
    else set_field(vp, parameter, value);
    cfg.validate();

    SweepPoint pt;
    pt.value = value;
    pt.logic = run_1t1r_experiment(cfg).report;
    auto scout = run_scouting_experiment(cfg);
    pt.scouting = scout.report;
    pt.or_margin = scout.gaps.or_gap.margin();
    pt.and_margin = scout.gaps.and_gap.margin();
    const auto ideal = ideal_pair_currents(vp, cfg.voltages.v_read);
    const Gap ideal_or{"or", ideal[0], ideal[1]};
    const Gap ideal_and{"and", ideal[1], ideal[2]};
    pt.ideal_or_margin = ideal_or.margin();
    pt.ideal_and_margin = ideal_and.margin();
    pt.ideal_xor_window = ideal_and.midpoint() - ideal_or.midpoint();
    points.push_back(std::move(pt));
  }
  return points;
}

}  // namespace memlogic
