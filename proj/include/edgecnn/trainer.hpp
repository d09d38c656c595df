//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/dataset.hpp"
#include "edgecnn/model.hpp"
#include "edgecnn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace edgecnn
{

struct TrainConfig
{
    int epochs           = 10;
    double learning_rate = 0.01;
    double momentum      = 0.9;
    int batch_size       = 32;
    std::uint64_t seed   = 0;
    /// L2 penalty on kernels (not biases); 0 disables it.
    double weight_decay  = 0.0;
    /// Layer indices whose parameters are not updated (in addition to layers flagged non-trainable).
    std::vector<int> freeze;

    void validate() const;
};

struct Metrics
{
    double accuracy    = 0.0;
    double loss        = 0.0;
    std::size_t correct = 0;
    std::size_t total   = 0;
};

struct EpochMetrics
{
    int epoch = 0;
    Metrics train;
    Metrics validation;
};

struct Gradients
{
    /// Same layout as ModelSpec::weights().
    std::vector<LayerWeights> params;
    /// d loss / d input.
    Tensor input;
    /// Cross-entropy of the sample (0 when the gradient was seeded from scores directly).
    double loss = 0.0;
};

/// Cross-entropy of softmax(scores) against `target` (a probability vector, usually one-hot).
double cross_entropy(const Tensor& scores, std::span<const float> target);

/// Exact reverse-mode gradients of cross_entropy(pre-softmax scores, target) with respect to every
/// parameter and the input. Max pool routes to the first maximal element in scan order; add
/// copies its gradient to both branches.
Gradients backward_pass(const ModelSpec& model, const Tensor& input, std::span<const float> target);

/// Backpropagates an arbitrary gradient on the pre-softmax scores.
Gradients backward_from_scores(const ModelSpec& model, const Tensor& input, const Tensor& score_grad);

struct TrainResult
{
    ModelSpec model;
    std::vector<EpochMetrics> history;
};

/// Mini-batch SGD with momentum (v = momentum * v + g; w -= lr * v) over the training split,
/// shuffled per epoch from the seed. Loss is the batch mean. Both splits are evaluated after
/// every epoch.
TrainResult train(ModelSpec model, const Dataset& dataset, const TrainConfig& config);

Metrics evaluate(const ModelSpec& model, std::span<const LabeledImage* const> items);
Metrics evaluate(const ModelSpec& model, const Dataset& dataset, Split split);

struct SaliencyMap
{
    /// h x w x 1, values in [0, 1]; 1 is the strongest attribution.
    Tensor map;
    int target_class = 0;
    /// True when the score gradient vanished everywhere (the map is then all zero).
    bool zero_gradient = false;
};

/// Per-pixel max over channels of |d score(class) / d input|, min-max normalized. With no class
/// the predicted one is used.
SaliencyMap saliency(const ModelSpec& model, const Tensor& image, std::optional<int> target_class = std::nullopt);

/// Grayscale rendering with dark = high attribution (255 * (1 - v)).
Tensor saliency_image(const SaliencyMap& map);

void write_history_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path);

}    // namespace edgecnn
