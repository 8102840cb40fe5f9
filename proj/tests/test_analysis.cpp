#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "memlogic/analysis.hpp"

using namespace memlogic;

namespace {

// Sort-based reference for the nearest-rank rule.
double rank_oracle(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const auto n = double(xs.size());
  std::size_t k = static_cast<std::size_t>(std::ceil(p * n));
  if (k == 0) k = 1;
  return xs[k - 1];
}

ExperimentConfig short_run(std::size_t cycles = 20) {
  ExperimentConfig cfg;
  cfg.cycles = cycles;
  return cfg;
}

}  // namespace

TEST_CASE("summarize agrees with the nearest-rank oracle") {
  Rng rng{21};
  std::lognormal_distribution<double> d(std::log(97e3), 0.45);
  for (std::size_t n : {1u, 2u, 7u, 100u, 1001u}) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = d(rng);
    const auto s = summarize("x", xs);
    CHECK(s.count == n);
    CHECK(s.min == *std::min_element(xs.begin(), xs.end()));
    CHECK(s.max == *std::max_element(xs.begin(), xs.end()));
    CHECK(s.p1 == rank_oracle(xs, 0.01));
    CHECK(s.p25 == rank_oracle(xs, 0.25));
    CHECK(s.median == rank_oracle(xs, 0.5));
    CHECK(s.p75 == rank_oracle(xs, 0.75));
    CHECK(s.p99 == rank_oracle(xs, 0.99));
    CHECK(s.mean == doctest::Approx(std::accumulate(xs.begin(), xs.end(), 0.0) / double(n)));
    if (n == 1) {
      CHECK(s.log_sd == 0.0);
    } else {
      double m = 0.0;
      for (double x : xs) m += std::log(x) / double(n);
      double ss = 0.0;
      for (double x : xs) ss += (std::log(x) - m) * (std::log(x) - m);
      CHECK(s.log_sd == doctest::Approx(std::sqrt(ss / double(n - 1))));
    }
  }
  CHECK_THROWS_AS(summarize("empty", std::vector<double>{}), std::invalid_argument);
  const std::vector<double> four = {1, 2, 3, 4};
  CHECK(nearest_rank(four, 0.0) == 1);
  CHECK(nearest_rank(four, 0.5) == 2);
  CHECK(nearest_rank(four, 0.51) == 3);
}

TEST_CASE("one cycle gives one trace per gate and combination") {
  const auto res = run_1t1r_experiment(short_run(1));
  CHECK(res.traces.size() == 16);
  REQUIRE(res.summaries.size() == 16);
  for (const auto& s : res.summaries) CHECK(s.count == 1);
  CHECK(res.report.trials() == 16);
}

TEST_CASE("defaults give error-free gates with consistent accounting") {
  const auto res = run_1t1r_experiment(ExperimentConfig{});
  CHECK(res.report.trials() == 1600);
  CHECK(res.report.failures() == 0);
  CHECK(res.report.errors() == 0);
  CHECK_FALSE(res.report.first_failure);
  REQUIRE(res.report.buckets.size() == 16);
  for (const auto& b : res.report.buckets) CHECK(b.trials == 100);
  REQUIRE(res.report.find("XOR", "11"));
  CHECK(res.report.find("XOR", "11")->failure_rate() == 0.0);
  CHECK(res.report.find("XOR", "22") == nullptr);
  std::size_t k = 0;
  for (const char* g : {"OR", "AND", "NIMP", "XOR"}) {
    for (const char* c : {"00", "01", "10", "11"}) {
      for (std::size_t cycle = 0; cycle < 100; ++cycle, ++k) {
        const auto& t = res.traces[k];
        CHECK(t.gate == g);
        CHECK(std::string{t.p ? '1' : '0', t.q ? '1' : '0'} == c);
        CHECK(t.cycle == cycle);
      }
    }
  }
}

TEST_CASE("wide HRS spread produces failures that match a re-binarization oracle") {
  ExperimentConfig cfg;
  cfg.device.variability.hrs_sigma_c2c *= 4.0;
  const auto res = run_1t1r_experiment(cfg);
  CHECK(res.report.failures() > 0);
  REQUIRE(res.report.first_failure);
  const double boundary = cfg.device.variability.boundary();
  std::map<std::pair<std::string, std::string>, std::size_t> oracle;
  for (const auto& t : res.traces) {
    CHECK(t.output_bit == binarize(t.final_resistance, boundary));
    if (binarize(t.final_resistance, boundary) != t.expected_bit)
      ++oracle[{t.gate, std::string{t.p ? '1' : '0', t.q ? '1' : '0'}}];
  }
  std::size_t total = 0;
  for (const auto& b : res.report.buckets) {
    CHECK(b.failures == oracle[{b.group, b.combo}]);
    CHECK(b.trials == 100);
    total += b.failures;
  }
  CHECK(total == res.report.failures());
  const auto& ff = *res.report.first_failure;
  CHECK(res.report.find(ff.group, ff.combo)->failures > 0);
}

TEST_CASE("scouting experiment at defaults") {
  SUBCASE("placed references") {
    const auto res = run_scouting_experiment(ExperimentConfig{});
    CHECK(res.samples.size() == 800);
    CHECK(res.report.failures() == 0);
    CHECK(res.report.errors() == 0);
    CHECK(res.overlapping_gaps.empty());
    CHECK(res.refs_inside_gaps());
    CHECK(res.ref_source == RefSource::Placed);
    CHECK(res.training_gaps.or_gap.contains(res.refs.i_or));
    CHECK(res.refs.i_read < res.refs.i_or);
    CHECK(res.refs.i_or < res.refs.i_and);
    // Split mode classifies the second half only.
    CHECK(res.report.trials() == 4 * 4 * 50);
    for (std::size_t k = 0; k + 1 < res.samples.size(); k += 2) {
      CHECK(res.samples[k].input_class.size() == 2);
      CHECK(res.samples[k + 1].input_class.size() == 1);
      CHECK(res.samples[k + 1].input_class[0] == res.samples[k].input_class[0]);
    }
  }
  SUBCASE("measured references") {
    ExperimentConfig cfg;
    cfg.ref_source = RefSource::Measured;
    const auto res = run_scouting_experiment(cfg);
    CHECK(res.refs == ReferenceSet::measured_refs());
    CHECK(res.report.failures() == 0);
    CHECK(res.refs_inside_gaps());
    CHECK(res.report.trials() == 4 * 4 * 100);
  }
  SUBCASE("in-sample placement with one cycle") {
    ExperimentConfig cfg;
    cfg.cycles = 1;
    cfg.ref_mode = RefMode::InSample;
    const auto res = run_scouting_experiment(cfg);
    CHECK(res.samples.size() == 8);
    CHECK(res.report.failures() == 0);
    CHECK(res.report.trials() == 16);
  }
  SUBCASE("without READ") {
    ExperimentConfig cfg;
    cfg.ops = {ScoutOp::Xor};
    const auto res = run_scouting_experiment(cfg);
    CHECK(res.samples.size() == 400);
    CHECK_FALSE(res.gaps.read);
    CHECK(res.report.buckets.size() == 4);
  }
}

TEST_CASE("non-switching cases") {
  ExperimentConfig cfg;
  cfg.gates = {};
  for (const auto& m : synthesized_library()) cfg.gates.push_back(m);
  const auto res = run_1t1r_experiment(cfg);
  const auto report = non_switching_report(res.traces);
  REQUIRE(report.size() == kNonSwitchingCases.size());
  std::map<int, const NonSwitchingCase*> by_id;
  for (const auto& c : report) {
    by_id[c.case_id] = &c;
    CHECK(c.binary_changes == 0);
  }
  REQUIRE(by_id[6]->count > 0);
  REQUIRE(by_id[3]->count > 0);
  CHECK(by_id[6]->state_changes > 0);
  CHECK(by_id[3]->variation > 0.0);
  for (const auto& c : report) {
    if (c.count > 1 && c.case_id != 6) CHECK(by_id[6]->variation > c.variation);
  }
  CHECK(by_id[6]->init->median > by_id[3]->init->median);

  SUBCASE("without read noise the balanced cases keep their value") {
    ExperimentConfig quiet = cfg;
    quiet.device.variability.read_noise_lrs = quiet.device.variability.read_noise_hrs = 0.0;
    const auto r = run_1t1r_experiment(quiet);
    for (const auto& t : r.traces) {
      if (t.te == t.be) {
        CHECK(t.init_resistance == t.final_resistance);
      }
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  ExperimentConfig a = short_run(30);
  a.device.variability.hrs_sigma_c2c = 1.2;
  ExperimentConfig b = a;
  a.threads = 1;
  b.threads = 4;
  const auto ra = run_1t1r_experiment(a);
  const auto rb = run_1t1r_experiment(b);
  REQUIRE(ra.traces.size() == rb.traces.size());
  for (std::size_t k = 0; k < ra.traces.size(); ++k) {
    CHECK(ra.traces[k].final_resistance == rb.traces[k].final_resistance);
    CHECK(ra.traces[k].gate == rb.traces[k].gate);
  }
  CHECK(ra.summaries == rb.summaries);
  CHECK(ra.report.failures() == rb.report.failures());
  const auto sa = run_scouting_experiment(a);
  const auto sb = run_scouting_experiment(b);
  REQUIRE(sa.samples.size() == sb.samples.size());
  for (std::size_t k = 0; k < sa.samples.size(); ++k) CHECK(sa.samples[k].current == sb.samples[k].current);
}

TEST_CASE("seeds change the draws") {
  ExperimentConfig a = short_run(5);
  ExperimentConfig b = a;
  b.seed = 2;
  CHECK(run_1t1r_experiment(a).traces[0].final_resistance != run_1t1r_experiment(b).traces[0].final_resistance);
}

TEST_CASE("characterization") {
  const auto res = characterize(ExperimentConfig{}, 10);
  CHECK(res.rows.size() == 1000);
  CHECK(res.summaries.size() == 2 + 2 * 10);
  CHECK(res.summaries[0].label == "LRS");
  CHECK(res.summaries[1].label == "HRS");
  CHECK(res.switch_failures == 0);
  CHECK(res.mean_ratio >= 15.5);
  CHECK(res.mean_ratio <= 23.3);
  double lrs = 0.0, hrs = 0.0;
  for (const auto& r : res.rows) {
    lrs += r.r_lrs;
    hrs += r.r_hrs;
  }
  CHECK(res.mean_ratio == doctest::Approx(hrs / lrs));
  CHECK_THROWS_AS(characterize(ExperimentConfig{}, 0), std::invalid_argument);
}

TEST_CASE("n-input scouting") {
  ExperimentConfig cfg = short_run(50);
  const auto two = run_n_input_scouting(cfg, 2);
  CHECK(two.by_popcount.size() == 3);
  CHECK(two.by_popcount[1].size() == 100);
  CHECK(two.thresholds.size() == 2);
  CHECK_FALSE(two.overlap);
  const auto many = run_n_input_scouting(cfg, 4);
  CHECK(many.by_popcount.size() == 5);
  CHECK(many.by_popcount[2].size() == 6 * 50);
  CHECK_THROWS_AS(run_n_input_scouting(cfg, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_n_input_scouting(cfg, 17), std::invalid_argument);
}

TEST_CASE("ideal pair currents") {
  const auto c = ideal_pair_currents(VariabilityParams{}, 0.1);
  CHECK(c[0] == doctest::Approx(0.2 / 97e3));
  CHECK(c[1] == doctest::Approx(0.1 / 5e3 + 0.1 / 97e3));
  CHECK(c[2] == doctest::Approx(0.2 / 5e3));
}

TEST_CASE("sweeps") {
  ExperimentConfig cfg = short_run(20);
  const std::vector<double> sigmas = {0.1, 1.6};
  const auto pts = run_sweep(cfg, "hrs_sigma_c2c", sigmas);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].value == 0.1);
  CHECK(pts[1].logic.failures() + pts[1].scouting.failures() >
        pts[0].logic.failures() + pts[0].scouting.failures());
  CHECK(pts[0].ideal_or_margin == doctest::Approx(pts[1].ideal_or_margin));

  const std::vector<double> ratios = {20.0, 10.0, 4.0};
  const auto rp = run_sweep(cfg, "hrs_lrs_ratio", ratios);
  CHECK(rp[0].ideal_xor_window > rp[1].ideal_xor_window);
  CHECK(rp[1].ideal_xor_window > rp[2].ideal_xor_window);
  // XOR window is half the distance between 00 and 11.
  const double l = 5e3;
  CHECK(rp[2].ideal_xor_window == doctest::Approx(0.5 * (0.2 / l - 0.2 / (4 * l))));

  CHECK_THROWS_AS(run_sweep(cfg, "hrs_sigma_c2c", std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(run_sweep(cfg, "bogus", sigmas), std::invalid_argument);
}

TEST_CASE("experiment validation") {
  ExperimentConfig cfg;
  cfg.cycles = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_1t1r_experiment(cfg), std::invalid_argument);
  ExperimentConfig neg;
  neg.device.variability.hrs_sigma_c2c = -1.0;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}
