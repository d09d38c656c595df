//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace edgecnn
{

struct BenchConfig
{
    int warmup_runs   = 5;
    int measured_runs = 100;

    enum class Input
    {
        Random,
        Image,
    };
    Input input = Input::Random;
    /// Seeds the synthetic inputs when `input` is Random.
    std::uint64_t seed = 0;
    /// Fixed input image when `input` is Image; resized to the model's input edge.
    std::filesystem::path image;
    std::string host_tag = "local";

    void validate() const;
};

struct BenchmarkResult
{
    std::string model_id;
    Family family = Family::Conv2D;
    HyperParams hyper;
    std::int64_t params     = 0;
    std::int64_t file_bytes = 0;
    /// One wall-clock timing window per measured forward pass, milliseconds.
    std::vector<double> samples;
    double latency_p95_ms = 0.0;
    double throughput_fps = 0.0;
    BenchConfig config;
};

/// Nearest-rank 95th percentile: the ceil(0.95 n)-th smallest sample (1-based).
double latency_p95(std::span<const double> samples_ms);

/// Inferences per second over the summed timing windows: n / (sum(ms) / 1000).
double throughput(std::span<const double> samples_ms);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Warmup passes, then `measured_runs` forward passes each timed individually on the monotonic
/// clock. Input generation happens outside the timing window.
BenchmarkResult run_benchmark(const std::filesystem::path& model_path, const BenchConfig& config);

}    // namespace edgecnn
