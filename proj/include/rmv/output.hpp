// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "rmv/config.hpp"
#include "rmv/experiments.hpp"

namespace rmv
{
//! Layout version written into every CSV header and JSON report.
inline constexpr int kReportFormatVersion = 1;

std::string report_json(Report const& r, RunConfig const& cfg);
//! "# rmvlab-csv v1 <table> <hash>", then the header row and the data rows.
std::string table_csv(Table const& t, std::string const& config_hash);
//! Key/value rendering of the summary (flattened dotted keys).
std::string summary_csv(Report const& r, std::string const& config_hash);
//! Self-contained SVG line chart.
std::string plot_svg(Plot const& p);

//! Write via a temporary file in the same directory and rename.
void write_atomic(std::string const& path, std::string const& content);

/*!
 * Write the report into out_dir (created if missing). format "json" writes
 * <cmd>.json; "csv" writes <cmd>_summary.csv and one CSV per table. Plots add
 * <cmd>_<plot>.svg. Returns the paths written.
 */
std::vector<std::string> write_report(Report const& r, RunConfig const& cfg,
                                      std::string const& out_dir, std::string const& format,
                                      bool plots);
}  // namespace rmv
