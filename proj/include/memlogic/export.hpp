#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memlogic/analysis.hpp"
#include "memlogic/config.hpp"

namespace memlogic {

/// A rectangular export table; CSV and JSON are two renderings of it.
///
/// Schemas (CSV header order, JSON object keys):
///   traces   gate,p,q,case_id,cycle,r_init_ohm,r_final_ohm,out_bit,expected_bit
///   currents op,class,cycle,current_a            (op is SCOUT or READ)
///   refs     i_read_a,i_or_a,i_and_a
///   summary  label,count,min,p1,p25,median,p75,p99,max,mean,log_sd
///   failures group,combo,trials,failures,errors,failure_rate
struct Table {
  using Value = std::variant<std::string, std::int64_t, double>;

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  bool single_object = false;  // JSON renders one object instead of an array

  std::string to_csv() const;
  std::string to_json() const;
};

/// Shortest decimal that reads back to the same double.
std::string format_number(double x);

Table traces_table(std::span<const GateTrace> traces);
Table currents_table(std::span<const CurrentSample> samples);
Table refs_table(const ReferenceSet& refs);
Table summary_table(std::string name, std::span<const DistributionSummary> summaries);
Table failures_table(std::string name, const FailureReport& report);
Table nonswitching_table(std::span<const NonSwitchingCase> cases);
Table gaps_table(const ClassGaps& gaps);
Table characterization_table(std::span<const CharacterizationRow> rows);
Table sweep_table(const std::string& parameter, std::span<const SweepPoint> points);
Table popcount_table(const NInputResult& result);

std::vector<DistributionSummary> parse_summary_csv(std::string_view text);
std::vector<DistributionSummary> parse_summary_json(std::string_view text);
/// Dispatches on the .csv / .json extension.
std::vector<DistributionSummary> read_summary_file(const std::filesystem::path& path);

class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes `<dir>/<table.name>.csv` and/or `.json`; creates `dir` if needed.
std::vector<std::filesystem::path> write_table(const Table& table, const std::filesystem::path& dir,
                                               ExportFormat format);

}  // namespace memlogic
