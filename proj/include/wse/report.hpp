#pragma once

// Run reports: a structured line-record file and an aligned text table.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wse/config.hpp"

namespace wse {

struct MetricRecord {
  std::string table;
  std::string row;
  std::string column;
  double value = 0.0;
};

class Report {
 public:
  Report() = default;
  explicit Report(std::string command) : command_(std::move(command)) {}

  const std::string& command() const { return command_; }

  void echo_config(const RunConfig& cfg);
  void provenance(const std::string& key, nlohmann::json value);
  void metric(const std::string& table, const std::string& row, const std::string& column,
              double value);

  const std::vector<MetricRecord>& metrics() const { return metrics_; }
  // First matching metric; throws when absent.
  double value(const std::string& table, const std::string& row, const std::string& column) const;

  // {"record": "command" | "config" | "provenance" | "metric", ...} per line.
  std::string to_jsonl() const;
  // Only the metric records; identical inputs give identical bytes.
  std::string metrics_jsonl() const;
  std::string to_table() const;

  // Writes <dir>/<command>.report.jsonl and <dir>/<command>.report.txt.
  void write(const std::filesystem::path& dir) const;

  static Report from_jsonl(const std::filesystem::path& path);

 private:
  std::string command_;
  std::vector<nlohmann::json> config_;
  std::vector<nlohmann::json> provenance_;
  std::vector<MetricRecord> metrics_;
};

}  // namespace wse
