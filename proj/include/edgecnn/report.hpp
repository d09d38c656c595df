//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/bench.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace edgecnn
{

/// One row of a benchmark report. Rows merged in from other hosts or devices may leave the
/// hyperparameter columns empty.
struct ReportRow
{
    std::string model_id;
    std::string family;
    std::optional<int> blocks;
    std::optional<int> filters;
    std::optional<int> image;
    std::optional<int> outputs;
    std::optional<std::int64_t> params;
    std::optional<std::int64_t> file_bytes;
    int runs   = 0;
    int warmup = 0;
    double latency_p95_ms = 0.0;
    double throughput_fps = 0.0;
    std::string host_tag;
};

enum class GroupBy
{
    Blocks,
    Filters,
    Image,
    Outputs,
    Params,
};

GroupBy parse_group_by(const std::string& name);
std::string to_string(GroupBy g);

ReportRow to_report_row(const BenchmarkResult& result);

inline constexpr const char* kReportHeader =
    "model_id,family,blocks,filters,image,outputs,params,file_bytes,runs,warmup,latency_p95_ms,throughput_fps,"
    "host_tag";
inline constexpr const char* kSamplesHeader = "model_id,run_index,ms";

/// Rows ordered by the group-by column (rows lacking it last), then host tag, then model id.
void write_report_csv(std::vector<ReportRow> rows, const std::filesystem::path& path, GroupBy group_by);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// Sidecar file with every raw timing window (model_id, run_index, ms).
void write_samples_csv(const std::vector<BenchmarkResult>& results, const std::filesystem::path& path);
std::map<std::string, std::vector<double>> read_samples_csv(const std::filesystem::path& path);

/// Default sidecar location for a report: `report.csv` -> `report.samples.csv`.
std::filesystem::path samples_path_for(const std::filesystem::path& report_path);

/// Writes the report CSV and its samples sidecar.
void write_report(const std::vector<BenchmarkResult>& results, const std::filesystem::path& path,
                  GroupBy group_by);

/// Counts per log10(params) bucket; buckets span [floor(log10 min), ceil(log10 max)] in `per_decade` steps.
struct Histogram
{
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};
Histogram params_histogram(const std::vector<std::int64_t>& params, int per_decade = 2);

/// latency_vs_<x>.svg, throughput_vs_<x>.svg and params_histogram.svg. Series are split by host tag.
std::vector<std::filesystem::path> write_svg_charts(const std::vector<ReportRow>& rows,
                                                   const std::filesystem::path& dir, GroupBy x_axis);

/// %.17g rendering; parsing it back with strtod reproduces the value exactly.
std::string format_exact(double v);

}    // namespace edgecnn
