//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/model.hpp"
#include "edgecnn/model_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edgecnn
{

/// Inclusive arithmetic sequence start, start+inc, ... <= end.
struct Range
{
    int start     = 1;
    int end       = 1;
    int increment = 1;

    void validate(const char* name) const;
    std::vector<int> values() const;
};

struct Grid
{
    Family family = Family::Conv2D;
    Range blocks;
    /// Absent for families without a filter hyperparameter.
    std::optional<Range> filters;
    Range image;
    Range outputs;

    void validate() const;

    /// Conv2D grid: blocks 2..6/1, filters 34..42/4, image 16..224/52, outputs 2..10/4.
    static Grid builtin_conv2d();
    /// DepthwiseConv2D grid: blocks 1..5/1, image 64..224/32, outputs 2..82/16.
    static Grid builtin_depthwise();
};

/// Reads a grid from JSON: {"family": "...", "blocks": {"start":..,"end":..,"increment":..}, ...}.
Grid load_grid(const std::filesystem::path& path);

/// Cartesian product in lexicographic (blocks, filters, image, outputs) order.
std::vector<HyperParams> enumerate_grid(const Grid& grid);

struct DeviceProfile
{
    std::string name;
    std::int64_t max_file_bytes = 0;
    int max_input_edge          = 0;
    int min_feature_edge        = 0;
    /// Empty means every family is accepted.
    std::vector<Family> supported_families;

    void validate() const;
    bool supports(Family family) const;

    /// 5.9 MiB file cap (5.9 * 2^20 rounded down), 224 px input cap, 4 px minimum feature edge.
    static DeviceProfile sipeed_like();
    static DeviceProfile unconstrained();
};

/// JSON: {"name", "max_file_bytes", "max_input_edge", "min_feature_edge", optional "supported_families"}.
DeviceProfile load_profile(const std::filesystem::path& path);
/// Built-in profile name or path to a profile file.
DeviceProfile resolve_profile(const std::string& name_or_path);

struct Violation
{
    std::string constraint;
    std::int64_t actual = 0;
    std::int64_t limit  = 0;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct FeasibilityReport
{
    HyperParams hyper;
    bool feasible = true;
    std::vector<Violation> violations;
};

inline constexpr const char* kFinalFeatureEdge = "final_feature_edge";
inline constexpr const char* kInputEdge        = "input_edge";
inline constexpr const char* kFileBytes        = "file_bytes";

/// The size clause is only checked when a size is supplied (an unbuildable spec has none).
FeasibilityReport check_feasible(const HyperParams& h, const DeviceProfile& profile,
                                 const std::optional<SizeEstimate>& size);

/// He-uniform kernels (bound sqrt(6 / fan_in)) and zero biases, drawn from SplitMix64 seeded by
/// (seed, model id, layer index). Independent of generation order.
void initialize_weights(ModelSpec& spec, std::uint64_t seed);

struct ManifestRow
{
    std::string id;
    Family family = Family::Conv2D;
    HyperParams hyper;
    std::optional<std::int64_t> params;
    std::optional<std::int64_t> file_bytes;
    bool feasible = false;
    std::vector<Violation> violations;
    std::filesystem::path file;
};

struct SuiteManifest
{
    std::vector<ManifestRow> rows;    // sorted by id
    std::size_t feasible_count = 0;
    std::filesystem::path manifest_path;
};

/// Builds, initializes and writes every feasible grid point to `out_dir/<id>.cnnm`, then writes
/// `out_dir/manifest.csv` with one row per grid point (infeasible points carry their violations).
SuiteManifest generate_suite(const Grid& grid, const DeviceProfile& profile, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

std::string format_violations(const std::vector<Violation>& violations);
void write_manifest_csv(const std::vector<ManifestRow>& rows, const std::filesystem::path& path);

}    // namespace edgecnn
