#include "wse/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wse/error.hpp"

namespace wse {

void Report::echo_config(const RunConfig& cfg) {
  config_.clear();
  for (const auto& [k, v] : cfg.values()) {
    config_.push_back({{"key", k}, {"value", v}, {"source", source_name(cfg.source(k))}});
  }
}

void Report::provenance(const std::string& key, nlohmann::json value) {
  provenance_.push_back({{"key", key}, {"value", std::move(value)}});
}

void Report::metric(const std::string& table, const std::string& row, const std::string& column,
                    double value) {
  metrics_.push_back({table, row, column, value});
}

double Report::value(const std::string& table, const std::string& row,
                     const std::string& column) const {
  for (const auto& m : metrics_) {
    if (m.table == table && m.row == row && m.column == column) return m.value;
  }
  throw InvariantError("report has no metric " + table + "/" + row + "/" + column);
}

std::string Report::metrics_jsonl() const {
  std::string out;
  for (const auto& m : metrics_) {
    nlohmann::json j = {{"record", "metric"},
                        {"table", m.table},
                        {"row", m.row},
                        {"column", m.column},
                        {"value", m.value}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string Report::to_jsonl() const {
  std::string out = nlohmann::json{{"record", "command"}, {"command", command_}}.dump() + "\n";
  for (auto j : config_) {
    j["record"] = "config";
    out += j.dump() + "\n";
  }
  for (auto j : provenance_) {
    j["record"] = "provenance";
    out += j.dump() + "\n";
  }
  return out + metrics_jsonl();
}

std::string Report::to_table() const {
  std::vector<std::string> tables;
  for (const auto& m : metrics_) {
    if (std::find(tables.begin(), tables.end(), m.table) == tables.end()) tables.push_back(m.table);
  }
  std::ostringstream os;
  os << "# " << command_ << "\n";
  for (const auto& t : tables) {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::map<std::pair<std::string, std::string>, double> cell;
    for (const auto& m : metrics_) {
      if (m.table != t) continue;
      if (std::find(rows.begin(), rows.end(), m.row) == rows.end()) rows.push_back(m.row);
      if (std::find(cols.begin(), cols.end(), m.column) == cols.end()) cols.push_back(m.column);
      cell[{m.row, m.column}] = m.value;
    }
    std::size_t row_w = t.size();
    for (const auto& r : rows) row_w = std::max(row_w, r.size());
    std::vector<std::size_t> col_w;
    for (const auto& c : cols) col_w.push_back(std::max<std::size_t>(c.size(), 10));

    os << "\n" << t << std::string(row_w - t.size(), ' ');
    for (std::size_t i = 0; i < cols.size(); ++i) {
      os << "  " << std::string(col_w[i] - cols[i].size(), ' ') << cols[i];
    }
    os << "\n";
    for (const auto& r : rows) {
      os << r << std::string(row_w - r.size(), ' ');
      for (std::size_t i = 0; i < cols.size(); ++i) {
        auto it = cell.find({r, cols[i]});
        std::string v = "-";
        if (it != cell.end()) {
          char buf[64];
          const double x = it->second;
          if (x == std::round(x) && std::fabs(x) < 1e15) {
            std::snprintf(buf, sizeof(buf), "%.0f", x);
          } else {
            std::snprintf(buf, sizeof(buf), "%.4f", x);
          }
          v = buf;
        }
        os << "  " << std::string(col_w[i] - std::min(col_w[i], v.size()), ' ') << v;
      }
      os << "\n";
    }
  }
  return os.str();
}

void Report::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto base = dir / (command_ + ".report");
  std::ofstream json(base.string() + ".jsonl", std::ios::binary);
  std::ofstream text(base.string() + ".txt", std::ios::binary);
  if (!json || !text) throw DataError("cannot write report under " + dir.string());
  json << to_jsonl();
  text << to_table();
}

Report Report::from_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  Report r;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string kind = j.at("record").get<std::string>();
      if (kind == "command") {
        r.command_ = j.at("command").get<std::string>();
      } else if (kind == "config") {
        auto c = j;
        c.erase("record");
        r.config_.push_back(std::move(c));
      } else if (kind == "provenance") {
        r.provenance(j.at("key").get<std::string>(), j.at("value"));
      } else if (kind == "metric") {
        r.metric(j.at("table").get<std::string>(), j.at("row").get<std::string>(),
                 j.at("column").get<std::string>(), j.at("value").get<double>());
      } else {
        throw DataError("unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return r;
}

}  // namespace wse
