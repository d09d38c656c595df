//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/bench.hpp"

#include "edgecnn/errors.hpp"
#include "edgecnn/executor.hpp"
#include "edgecnn/image.hpp"
#include "edgecnn/model_io.hpp"
#include "edgecnn/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace edgecnn
{

void BenchConfig::validate() const
{
    if (measured_runs < 20)
    {
        throw ParameterError("measured_runs must be at least 20 for a p95, got " + std::to_string(measured_runs));
    }
    if (warmup_runs < 0)
    {
        throw ParameterError("warmup_runs must not be negative");
    }
    if (host_tag.find_first_of(",\n\r\"") != std::string::npos)
    {
        throw ParameterError("host tag must not contain commas, quotes or newlines");
    }
    if (input == Input::Image && image.empty())
    {
        throw ParameterError("image input selected without an image path");
    }
}

double latency_p95(std::span<const double> samples_ms)
{
    if (samples_ms.empty())
    {
        throw ParameterError("latency_p95 needs at least one sample");
    }
    std::vector<double> sorted(samples_ms.begin(), samples_ms.end());
    std::sort(sorted.begin(), sorted.end());
    // ceil(0.95 n) in integer arithmetic.
    const std::size_t rank = (95 * sorted.size() + 99) / 100;
    return sorted[rank - 1];
}

double throughput(std::span<const double> samples_ms)
{
    if (samples_ms.empty())
    {
        throw ParameterError("throughput needs at least one sample");
    }
    double total_ms = 0.0;
    for (double s : samples_ms)
    {
        if (!(s > 0.0))
        {
            throw MeasurementError("timing window must be positive, got " + std::to_string(s) + " ms");
        }
        total_ms += s;
    }
    return static_cast<double>(samples_ms.size()) / (total_ms / 1000.0);
}

namespace
{

std::vector<double> average_ranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });

    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();)
    {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
        {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
        {
            ranks[order[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

}    // namespace

double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
    {
        throw ParameterError("spearman needs two equally sized series of at least 2 values");
    }
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const double n               = static_cast<double>(x.size());
    const double mx              = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my              = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i)
    {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
    {
        throw ParameterError("spearman is undefined for a constant series");
    }
    return sxy / std::sqrt(sxx * syy);
}

BenchmarkResult run_benchmark(const std::filesystem::path& model_path, const BenchConfig& config)
{
    config.validate();

    const std::vector<std::uint8_t> bytes = read_file_bytes(model_path);
    const ModelSpec spec                  = deserialize(bytes);
    const Shape& in_shape                 = spec.input_shape();

    Tensor fixed;
    if (config.input == BenchConfig::Input::Image)
    {
        fixed = load_normalized_image(config.image, in_shape.height(), in_shape.width());
    }
    auto make_input = [&](int run) {
        if (config.input == BenchConfig::Input::Image)
        {
            return fixed;
        }
        Tensor t(in_shape);
        SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(run)));
        for (float& v : t.data())
        {
            v = static_cast<float>(rng.uniform());
        }
        return t;
    };

    BenchmarkResult r;
    r.model_id   = spec.id();
    r.family     = spec.family();
    r.hyper      = spec.hyper();
    r.params     = count_parameters(spec);
    r.file_bytes = static_cast<std::int64_t>(bytes.size());
    r.config     = config;

    float sink = 0.0f;
    for (int i = 0; i < config.warmup_runs; ++i)
    {
        const Tensor in = make_input(-1 - i);
        sink += forward(spec, in)[0];
    }

    r.samples.reserve(static_cast<std::size_t>(config.measured_runs));
    for (int i = 0; i < config.measured_runs; ++i)
    {
        const Tensor in  = make_input(i);
        const auto start = std::chrono::steady_clock::now();
        const Tensor out = forward(spec, in);
        const auto stop  = std::chrono::steady_clock::now();
        sink += out[0];
        r.samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    // Keeps the result of every pass observable.
    if (!std::isfinite(sink))
    {
        throw MeasurementError("model " + spec.id() + " produced non-finite outputs");
    }

    r.latency_p95_ms = latency_p95(r.samples);
    r.throughput_fps = throughput(r.samples);
    return r;
}

}    // namespace edgecnn
