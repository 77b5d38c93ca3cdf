// SPDX-License-Identifier: Apache-2.0
//
// Result emission. CSV output is byte-stable for a given table (shortest
// round-trip number formatting, no timestamps); the JSON output mirrors the
// records, embeds the fully resolved config and keeps the timestamp confined
// to its metadata object.

#pragma once

#include <string>

#include "risfuse/experiment.hpp"

namespace risfuse {

enum class OutputFormat { kCsv, kJson };

OutputFormat output_format_from_string(const std::string& name);

/// CSV serialization of the data rows (header + one line per row).
std::string results_csv_string(const ResultTable& table);

/// Writes `<path>.json` (records + config + metadata) and, for kCsv, also
/// `<path>.csv`. When the table carries an optimizer trace a sidecar
/// `<path>_mm_trace.csv` with (iteration, g) pairs is written as well.
/// Returns the list of files written.
std::vector<std::string> emit_results(const ResultTable& table, const std::string& path,
                                      OutputFormat format);

/// Reads a table back from `<path>.json`-style output (round-trip of
/// emit_results, minus the optimizer trace sidecar).
ResultTable read_results_json(const std::string& json_path);

}  // namespace risfuse
