//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/dataset.hpp"

#include "edgecnn/errors.hpp"
#include "edgecnn/image.hpp"
#include "edgecnn/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace edgecnn
{

namespace fs = std::filesystem;

Split parse_split(const std::string& name)
{
    if (name == "train")
    {
        return Split::Train;
    }
    if (name == "validation" || name == "val")
    {
        return Split::Validation;
    }
    throw ParameterError("unknown split '" + name + "', expected train or validation");
}

Dataset::Dataset(std::vector<std::string> class_names, std::vector<LabeledImage> items, int edge)
    : class_names_(std::move(class_names))
    , items_(std::move(items))
    , edge_(edge)
{
    if (class_names_.size() < 2)
    {
        throw DatasetError("a dataset needs at least two classes");
    }
    for (const auto& item : items_)
    {
        if (item.label < 0 || item.label >= class_count())
        {
            throw DatasetError("label " + std::to_string(item.label) + " out of range for " + item.path);
        }
        if (item.tensor.shape() != Shape::hwc(edge_, edge_, 3))
        {
            throw DatasetError(item.path + " has shape " + item.tensor.shape().str());
        }
    }
    std::sort(items_.begin(), items_.end(),
              [](const LabeledImage& a, const LabeledImage& b) { return a.path < b.path; });
}

std::vector<const LabeledImage*> Dataset::split(Split which) const
{
    std::vector<const LabeledImage*> out;
    for (const auto& item : items_)
    {
        if (item.split == which)
        {
            out.push_back(&item);
        }
    }
    return out;
}

void Dataset::assign_split(double train_ratio, std::uint64_t seed)
{
    if (!(train_ratio >= 0.0 && train_ratio <= 1.0))
    {
        throw ParameterError("split ratio must be within [0, 1]");
    }
    std::vector<std::uint64_t> keys(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i)
    {
        keys[i] = mix_seed(seed, fnv1a(items_[i].path));
    }
    std::vector<std::size_t> order(items_.size());
    std::iota(order.begin(), order.end(), std::size_t{ 0 });
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : items_[a].path < items_[b].path;
    });

    const auto n_train = static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(items_.size())));
    for (std::size_t rank = 0; rank < order.size(); ++rank)
    {
        items_[order[rank]].split = rank < n_train ? Split::Train : Split::Validation;
    }
}

namespace
{

bool is_image_file(const fs::path& p)
{
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".ppm";
}

}    // namespace

Dataset load_directory(const fs::path& root, int edge, double train_ratio, std::uint64_t seed)
{
    if (edge <= 0)
    {
        throw ParameterError("target edge must be positive");
    }
    if (!fs::is_directory(root))
    {
        throw IoError("dataset root " + root.string() + " is not a directory");
    }

    std::vector<std::string> classes;
    for (const auto& entry : fs::directory_iterator(root))
    {
        if (entry.is_directory())
        {
            classes.push_back(entry.path().filename().string());
        }
    }
    std::sort(classes.begin(), classes.end());
    if (classes.size() < 2)
    {
        throw DatasetError(root.string() + " must contain at least two class directories");
    }

    std::vector<LabeledImage> items;
    std::vector<std::string> warnings;
    for (std::size_t label = 0; label < classes.size(); ++label)
    {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(root / classes[label]))
        {
            if (entry.is_regular_file() && is_image_file(entry.path()))
            {
                files.push_back(entry.path());
            }
        }
        if (files.empty())
        {
            throw DatasetError("class directory " + (root / classes[label]).string() + " has no PNG or PPM files");
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& file : files)
        {
            const std::string rel = classes[label] + "/" + file.filename().string();
            try
            {
                LabeledImage item;
                item.tensor = load_normalized_image(file, edge, edge);
                item.label  = static_cast<int>(label);
                item.path   = rel;
                items.push_back(std::move(item));
            }
            catch (const std::exception& e)
            {
                warnings.push_back(rel + ": " + e.what());
            }
        }
    }

    Dataset ds(std::move(classes), std::move(items), edge);
    ds.warnings = std::move(warnings);
    ds.assign_split(train_ratio, seed);
    return ds;
}

Dataset make_synthetic_brightness(int per_class, int edge, double train_ratio, std::uint64_t seed)
{
    if (per_class <= 0 || edge < 2)
    {
        throw ParameterError("synthetic dataset needs per_class >= 1 and edge >= 2");
    }
    const std::vector<std::string> classes = { "bright", "dark" };
    std::vector<LabeledImage> items;
    for (int label = 0; label < 2; ++label)
    {
        for (int k = 0; k < per_class; ++k)
        {
            char name[32];
            std::snprintf(name, sizeof(name), "%05d.ppm", k);
            LabeledImage item;
            item.path  = classes[static_cast<std::size_t>(label)] + "/" + name;
            item.label = label;
            item.tensor = Tensor(Shape::hwc(edge, edge, 3));

            SplitMix64 rng(mix_seed(seed, fnv1a(item.path)));
            for (int y = 0; y < edge; ++y)
            {
                for (int x = 0; x < edge; ++x)
                {
                    for (int c = 0; c < 3; ++c)
                    {
                        std::uint64_t byte = 0;
                        if (x < edge / 2)
                        {
                            byte = label == 0 ? 153 + rng.below(103) : rng.below(103);
                        }
                        else
                        {
                            byte = rng.below(256);
                        }
                        item.tensor.at(y, x, c) = static_cast<float>(byte) / 255.0f;
                    }
                }
            }
            items.push_back(std::move(item));
        }
    }
    Dataset ds(classes, std::move(items), edge);
    ds.assign_split(train_ratio, seed);
    return ds;
}

void write_dataset(const Dataset& dataset, const fs::path& root)
{
    for (const auto& name : dataset.class_names())
    {
        std::error_code ec;
        fs::create_directories(root / name, ec);
        if (ec)
        {
            throw IoError("cannot create " + (root / name).string() + ": " + ec.message());
        }
    }
    for (const auto& item : dataset.items())
    {
        Tensor bytes = item.tensor;
        for (float& v : bytes.data())
        {
            v *= 255.0f;
        }
        fs::path out = root / item.path;
        out.replace_extension(".ppm");
        write_image(out, bytes);
    }
}

}    // namespace edgecnn
