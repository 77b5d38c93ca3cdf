// SPDX-License-Identifier: Apache-2.0

#include "risfuse/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace risfuse {

namespace {

using nlohmann::json;

/// Shortest round-trip decimal form; locale-independent and deterministic.
std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

json row_to_json(const ResultRow& r) {
  return json{{"experiment", r.experiment},
              {"rule", r.rule},
              {"ris_mode", r.ris_mode},
              {"sweep_name", r.sweep_name},
              {"sweep_value", r.sweep_value},
              {"pf0_target", r.pf0_target},
              {"pf0_achieved", r.pf0_achieved},
              {"pd0", r.pd0},
              {"pd0_stderr", r.pd0_stderr},
              {"trials_h0", r.trials_h0},
              {"trials_h1", r.trials_h1},
              {"seed", r.seed},
              {"status", r.status},
              {"reason", r.reason},
              {"pf0_stderr", r.pf0_stderr},
              {"threshold", r.threshold},
              {"failed_trials", r.failed_trials}};
}

double json_double(const json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.experiment = j.at("experiment").get<std::string>();
  r.rule = j.at("rule").get<std::string>();
  r.ris_mode = j.at("ris_mode").get<std::string>();
  r.sweep_name = j.at("sweep_name").get<std::string>();
  r.sweep_value = json_double(j.at("sweep_value"));
  r.pf0_target = json_double(j.at("pf0_target"));
  r.pf0_achieved = json_double(j.at("pf0_achieved"));
  r.pd0 = json_double(j.at("pd0"));
  r.pd0_stderr = json_double(j.at("pd0_stderr"));
  r.trials_h0 = j.at("trials_h0").get<long long>();
  r.trials_h1 = j.at("trials_h1").get<long long>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.status = j.at("status").get<std::string>();
  r.reason = j.at("reason").get<std::string>();
  r.pf0_stderr = json_double(j.at("pf0_stderr"));
  r.threshold = json_double(j.at("threshold"));
  r.failed_trials = j.at("failed_trials").get<long long>();
  return r;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw std::invalid_argument("unknown output format: " + name);
}

std::string results_csv_string(const ResultTable& table) {
  std::ostringstream out;
  out << "experiment,rule,ris_mode,sweep_name,sweep_value,pf0_target,pf0_achieved,pd0,"
         "pd0_stderr,trials_h0,trials_h1,seed\n";
  for (const ResultRow& r : table.rows) {
    out << r.experiment << ',' << r.rule << ',' << r.ris_mode << ',' << r.sweep_name << ','
        << format_double(r.sweep_value) << ',' << format_double(r.pf0_target) << ','
        << format_double(r.pf0_achieved) << ',' << format_double(r.pd0) << ','
        << format_double(r.pd0_stderr) << ',' << r.trials_h0 << ',' << r.trials_h1 << ','
        << r.seed << '\n';
  }
  return out.str();
}

std::vector<std::string> emit_results(const ResultTable& table, const std::string& path,
                                      OutputFormat format) {
  std::vector<std::string> written;

  json records = json::array();
  for (const ResultRow& r : table.rows) records.push_back(row_to_json(r));
  json doc{{"experiment", table.experiment},
           {"records", records},
           {"config", table.resolved_config},
           {"extras", table.extras},
           {"metadata", {{"tool", "risfuse"}, {"timestamp", timestamp_utc()}}}};

  const std::string json_path = path + ".json";
  write_file(json_path, doc.dump(2) + "\n");
  written.push_back(json_path);

  if (format == OutputFormat::kCsv) {
    const std::string csv_path = path + ".csv";
    write_file(csv_path, results_csv_string(table));
    written.push_back(csv_path);
  }

  if (table.mm_trace) {
    std::ostringstream trace;
    trace << "iteration,g\n";
    for (std::size_t i = 0; i < table.mm_trace->g_values.size(); ++i)
      trace << i << ',' << format_double(table.mm_trace->g_values[i]) << '\n';
    const std::string trace_path = path + "_mm_trace.csv";
    write_file(trace_path, trace.str());
    written.push_back(trace_path);
  }
  return written;
}

ResultTable read_results_json(const std::string& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + json_path);
  json doc;
  in >> doc;

  ResultTable table;
  table.experiment = doc.at("experiment").get<std::string>();
  for (const json& j : doc.at("records")) table.rows.push_back(row_from_json(j));
  table.resolved_config = doc.at("config");
  table.extras = doc.at("extras");
  return table;
}

}  // namespace risfuse
