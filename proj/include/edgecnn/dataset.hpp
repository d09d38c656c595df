//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace edgecnn
{

enum class Split
{
    Train,
    Validation,
};

Split parse_split(const std::string& name);

struct LabeledImage
{
    /// edge x edge x 3, values in [0, 1].
    Tensor tensor;
    int label = 0;
    /// Relative to the dataset root, '/'-separated ("grasped/0001.png").
    std::string path;
    Split split = Split::Train;
};

class Dataset
{
public:
    Dataset(std::vector<std::string> class_names, std::vector<LabeledImage> items, int edge);

    const std::vector<std::string>& class_names() const
    {
        return class_names_;
    }
    int class_count() const
    {
        return static_cast<int>(class_names_.size());
    }
    int edge() const
    {
        return edge_;
    }
    /// Sorted by path.
    const std::vector<LabeledImage>& items() const
    {
        return items_;
    }
    std::vector<const LabeledImage*> split(Split which) const;

    /// Files that could not be decoded, as "path: reason".
    std::vector<std::string> warnings;

    /// Reassigns train/validation. Items are ranked by hash(seed, path) and the first
    /// round(ratio * n) become training items, so the result depends only on the set of paths.
    void assign_split(double train_ratio, std::uint64_t seed);

private:
    std::vector<std::string> class_names_;
    std::vector<LabeledImage> items_;
    int edge_;
};

/// root/<class>/<image>.(png|ppm). Classes are the sorted subdirectory names.
Dataset load_directory(const std::filesystem::path& root, int edge, double train_ratio, std::uint64_t seed);

/// Two classes, "bright" and "dark". The left half of each image is bright (bytes 153..255) or
/// dark (0..102) depending on the class; the right half is uniform noise for both, so only the
/// left half carries label information.
Dataset make_synthetic_brightness(int per_class, int edge, double train_ratio, std::uint64_t seed);

/// Writes every item as root/<class>/<name>.ppm.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

}    // namespace edgecnn
