#include "tbsim/log_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tbsim {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

void write_log(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "# tbsim trajectory log\n";
  out << "# schema_version: " << log.meta.schema_version << "\n";
  out << "# tool_version: " << (log.meta.tool_version.empty() ? "0.0.0" : log.meta.tool_version)
      << "\n";
  out << "# scenario: " << (log.meta.scenario.empty() ? "custom" : log.meta.scenario) << "\n";
  out << "# config_hash: " << (log.meta.config_hash.empty() ? "-" : log.meta.config_hash) << "\n";
  out << "# sample_rate_hz: " << format_value(log.meta.sample_rate) << "\n";
  out << "# failure: " << (log.meta.failure.empty() ? "<none>" : log.meta.failure) << "\n";
  if (!log.meta.config_json.empty()) out << "# config: " << log.meta.config_json << "\n";

  for (std::size_t i = 0; i < log.columns.size(); ++i) {
    if (i) out << ",";
    out << log.columns[i];
  }
  out << "\n";
  for (const auto& row : log.rows) {
    if (row.size() != log.columns.size())
      throw SchemaError("row width " + std::to_string(row.size()) + " does not match " +
                        std::to_string(log.columns.size()) + " columns");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << format_value(row[i]);
    }
    out << "\n";
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

TrajectoryLog read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open log file '" + path + "'");

  TrajectoryLog log;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(line.substr(1, colon - 1));
      const std::string value = trim(line.substr(colon + 1));
      if (key == "schema_version") log.meta.schema_version = std::stoi(value);
      else if (key == "tool_version") log.meta.tool_version = value;
      else if (key == "scenario") log.meta.scenario = value;
      else if (key == "config_hash") log.meta.config_hash = value;
      else if (key == "sample_rate_hz") log.meta.sample_rate = std::stod(value);
      else if (key == "failure") log.meta.failure = value == "<none>" ? "" : value;
      else if (key == "config") log.meta.config_json = line.substr(line.find(':') + 1).empty() ? "" : trim(line.substr(colon + 1));
      continue;
    }
    if (!have_header) {
      log.columns = split_csv(line);
      have_header = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != log.columns.size())
      throw SchemaError("row " + std::to_string(log.rows.size() + 1) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(log.columns.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception&) {
        throw SchemaError("cannot parse numeric cell '" + c + "' in row " +
                          std::to_string(log.rows.size() + 1));
      }
    }
    log.rows.push_back(std::move(row));
  }
  if (!have_header) throw SchemaError("log file '" + path + "' has no header line");
  if (log.meta.schema_version != 1)
    throw SchemaError("unsupported schema_version " + std::to_string(log.meta.schema_version));

  // Columns may be reordered by foreign tools, but every schema column must
  // exist by name.
  for (const auto& name : TrajectoryLog::schema_v1())
    if (!log.has_col(name)) throw SchemaError("log is missing column '" + name + "'");
  return log;
}

}  // namespace tbsim
