#include "memlogic/export.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace memlogic {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Table::Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return csv_field(*s);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return format_number(std::get<double>(v));
}

ordered_json json_value(const Table::Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::get<double>(v);
}

std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + s + "' in summary");
  }
  return v;
}

const std::vector<std::string> kSummaryColumns = {"label", "count", "min",  "p1",   "p25",   "median",
                                                  "p75",   "p99",   "max",  "mean", "log_sd"};

Table make_table(std::string name, std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.columns = std::move(columns);
  return t;
}

std::int64_t as_int(bool b) { return b ? 1 : 0; }
std::int64_t as_int(std::size_t n) { return static_cast<std::int64_t>(n); }

}  // namespace

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string Table::to_csv() const {
  std::string s;
  for (std::size_t k = 0; k < columns.size(); ++k) s += (k ? "," : "") + columns[k];
  s += '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + render(row[k]);
    s += '\n';
  }
  return s;
}

std::string Table::to_json() const {
  auto object = [&](const std::vector<Value>& row) {
    ordered_json o = ordered_json::object();
    for (std::size_t k = 0; k < columns.size(); ++k) o[columns[k]] = json_value(row[k]);
    return o;
  };
  ordered_json j;
  if (single_object && rows.size() == 1) {
    j = object(rows.front());
  } else {
    j = ordered_json::array();
    for (const auto& row : rows) j.push_back(object(row));
  }
  return j.dump(2) + "\n";
}

Table traces_table(std::span<const GateTrace> traces) {
  Table t = make_table("traces",
          {"gate", "p", "q", "case_id", "cycle", "r_init_ohm", "r_final_ohm", "out_bit", "expected_bit"});
  for (const auto& tr : traces) {
    t.rows.push_back({tr.gate, as_int(tr.p), as_int(tr.q), std::int64_t{tr.case_id}, as_int(tr.cycle),
                      tr.init_resistance, tr.final_resistance, as_int(tr.output_bit),
                      as_int(tr.expected_bit)});
  }
  return t;
}

Table currents_table(std::span<const CurrentSample> samples) {
  Table t = make_table("currents", {"op", "class", "cycle", "current_a"});
  for (const auto& s : samples) {
    t.rows.push_back({std::string(s.input_class.size() == 1 ? "READ" : "SCOUT"), s.input_class,
                      as_int(s.cycle), s.current});
  }
  return t;
}

Table refs_table(const ReferenceSet& refs) {
  Table t = make_table("refs", {"i_read_a", "i_or_a", "i_and_a"});
  t.rows.push_back({refs.i_read, refs.i_or, refs.i_and});
  t.single_object = true;
  return t;
}

Table summary_table(std::string name, std::span<const DistributionSummary> summaries) {
  Table t = make_table(std::move(name), kSummaryColumns);
  for (const auto& s : summaries) {
    t.rows.push_back({s.label, as_int(s.count), s.min, s.p1, s.p25, s.median, s.p75, s.p99, s.max, s.mean,
                      s.log_sd});
  }
  return t;
}

Table failures_table(std::string name, const FailureReport& report) {
  Table t = make_table(std::move(name), {"group", "combo", "trials", "failures", "errors", "failure_rate"});
  for (const auto& b : report.buckets) {
    t.rows.push_back({b.group, b.combo, as_int(b.trials), as_int(b.failures), as_int(b.errors),
                      b.failure_rate()});
  }
  return t;
}

Table nonswitching_table(std::span<const NonSwitchingCase> cases) {
  Table t = make_table("nonswitching",
          {"case_id", "count", "binary_changes", "state_changes", "init_median_ohm", "final_min_ohm",
           "final_max_ohm", "variation"});
  for (const auto& c : cases) {
    if (!c.final) continue;
    t.rows.push_back({std::int64_t{c.case_id}, as_int(c.count), as_int(c.binary_changes),
                      as_int(c.state_changes), c.init->median, c.final->min, c.final->max, c.variation});
  }
  return t;
}

Table gaps_table(const ClassGaps& gaps) {
  Table t = make_table("gaps", {"gap", "lower_max_a", "upper_min_a", "width_a", "margin"});
  auto add = [&](const Gap& g) { t.rows.push_back({g.name, g.lower_max, g.upper_min, g.width(), g.margin()}); };
  if (gaps.read) add(*gaps.read);
  add(gaps.or_gap);
  add(gaps.and_gap);
  return t;
}

Table characterization_table(std::span<const CharacterizationRow> rows) {
  Table t = make_table("resistances", {"cell", "cycle", "r_lrs_ohm", "r_hrs_ohm"});
  for (const auto& r : rows) t.rows.push_back({as_int(r.cell), as_int(r.cycle), r.r_lrs, r.r_hrs});
  return t;
}

Table sweep_table(const std::string& parameter, std::span<const SweepPoint> points) {
  Table t = make_table("sweep",
          {"parameter", "value", "logic_trials", "logic_failures", "logic_errors", "logic_failure_rate",
           "scouting_trials", "scouting_failures", "scouting_failure_rate", "or_margin", "and_margin",
           "ideal_or_margin", "ideal_and_margin", "ideal_xor_window_a"});
  for (const auto& p : points) {
    t.rows.push_back({parameter, p.value, as_int(p.logic.trials()), as_int(p.logic.failures()),
                      as_int(p.logic.errors()), p.logic.overall_rate(), as_int(p.scouting.trials()),
                      as_int(p.scouting.failures()), p.scouting.overall_rate(), p.or_margin.value_or(0.0),
                      p.and_margin.value_or(0.0), p.ideal_or_margin, p.ideal_and_margin, p.ideal_xor_window});
  }
  return t;
}

Table popcount_table(const NInputResult& result) {
  Table t = make_table("popcount", {"gap", "lower_max_a", "upper_min_a", "open", "threshold_a"});
  for (std::size_t k = 0; k < result.gaps.size(); ++k) {
    const auto& g = result.gaps[k];
    const double thr = k < result.thresholds.size() ? result.thresholds[k] : g.midpoint();
    t.rows.push_back({g.name, g.lower_max, g.upper_min, as_int(g.open()), thr});
  }
  return t;
}

std::vector<DistributionSummary> parse_summary_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) return {};
  if (split_csv_row(line) != kSummaryColumns) throw std::invalid_argument("not a summary table header");
  std::vector<DistributionSummary> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_csv_row(line);
    if (f.size() != kSummaryColumns.size()) throw std::invalid_argument("summary row has wrong field count");
    DistributionSummary s;
    s.label = f[0];
    s.count = static_cast<std::size_t>(std::stoull(f[1]));
    s.min = parse_double(f[2]);
    s.p1 = parse_double(f[3]);
    s.p25 = parse_double(f[4]);
    s.median = parse_double(f[5]);
    s.p75 = parse_double(f[6]);
    s.p99 = parse_double(f[7]);
    s.max = parse_double(f[8]);
    s.mean = parse_double(f[9]);
    s.log_sd = parse_double(f[10]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DistributionSummary> parse_summary_json(std::string_view text) {
  auto j = ordered_json::parse(text);
  std::vector<DistributionSummary> out;
  for (const auto& o : j) {
    DistributionSummary s;
    s.label = o.at("label").get<std::string>();
    s.count = o.at("count").get<std::size_t>();
    s.min = o.at("min").get<double>();
    s.p1 = o.at("p1").get<double>();
    s.p25 = o.at("p25").get<double>();
    s.median = o.at("median").get<double>();
    s.p75 = o.at("p75").get<double>();
    s.p99 = o.at("p99").get<double>();
    s.max = o.at("max").get<double>();
    s.mean = o.at("mean").get<double>();
    s.log_sd = o.at("log_sd").get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DistributionSummary> read_summary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  if (path.extension() == ".json") return parse_summary_json(ss.str());
  return parse_summary_csv(ss.str());
}

std::vector<std::filesystem::path> write_table(const Table& table, const std::filesystem::path& dir,
                                               ExportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create directory: " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& ext, const std::string& content) {
    auto path = dir / (table.name + ext);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path, "cannot open for writing");
    out << content;
    if (!out) throw IoError(path, "write failed");
    written.push_back(path);
  };
  if (format != ExportFormat::Json) emit(".csv", table.to_csv());
  if (format != ExportFormat::Csv) emit(".json", table.to_json());
  return written;
}

}  // namespace memlogic
