//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace edgecnn
{

enum class Family
{
    Conv2D,
    Depthwise,
    ResNet1,
    MobileNetLike,
};

std::string to_string(Family family);
Family parse_family(const std::string& name);

/// Generator hyperparameters: blocks b, filters f, input edge i, outputs o.
/// `filters` is 0 for families that do not use it. `alpha` is the channel multiplier of
/// MobileNetLike models and 1.0 elsewhere.
struct HyperParams
{
    int blocks  = 1;
    int filters = 0;
    int image   = 16;
    int outputs = 2;
    double alpha = 1.0;

    void validate() const;

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct Conv2DLayer
{
    int filters;
    int kernel     = 3;
    bool trainable = true;
    friend bool operator==(const Conv2DLayer&, const Conv2DLayer&) = default;
};

struct DepthwiseConv2DLayer
{
    int kernel     = 3;
    bool trainable = true;
    friend bool operator==(const DepthwiseConv2DLayer&, const DepthwiseConv2DLayer&) = default;
};

struct MaxPoolLayer
{
    friend bool operator==(const MaxPoolLayer&, const MaxPoolLayer&) = default;
};

struct FlattenLayer
{
    friend bool operator==(const FlattenLayer&, const FlattenLayer&) = default;
};

struct DenseLayer
{
    int units;
    bool trainable = true;
    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ReluLayer
{
    friend bool operator==(const ReluLayer&, const ReluLayer&) = default;
};

struct SoftmaxLayer
{
    friend bool operator==(const SoftmaxLayer&, const SoftmaxLayer&) = default;
};

/// Elementwise sum of the previous layer's output and the output of layer `skip_source`.
struct AddLayer
{
    int skip_source;
    friend bool operator==(const AddLayer&, const AddLayer&) = default;
};

using LayerSpec = std::variant<Conv2DLayer, DepthwiseConv2DLayer, MaxPoolLayer, FlattenLayer, DenseLayer, ReluLayer,
                               SoftmaxLayer, AddLayer>;

std::string layer_type_name(const LayerSpec& layer);
bool has_parameters(const LayerSpec& layer);
/// Trainable flag for parameterized layers; false for layers without parameters.
bool is_trainable(const LayerSpec& layer);

/// Kernel and bias of one layer. Both are empty for parameter-free layers.
struct LayerWeights
{
    std::vector<float> kernel;
    std::vector<float> bias;

    std::size_t size() const
    {
        return kernel.size() + bias.size();
    }
    friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

/// Element counts a layer's kernel and bias must have.
struct WeightLayout
{
    std::size_t kernel = 0;
    std::size_t bias   = 0;

    friend bool operator==(const WeightLayout&, const WeightLayout&) = default;
};

/// Ordered layer graph plus optional weights. The constructor propagates shapes through the
/// whole graph, so every ModelSpec that exists is shape-consistent and ends in Softmax.
class ModelSpec
{
public:
    ModelSpec(std::string id, Family family, HyperParams hyper, Shape input_shape, std::vector<LayerSpec> layers);

    const std::string& id() const
    {
        return id_;
    }
    Family family() const
    {
        return family_;
    }
    const HyperParams& hyper() const
    {
        return hyper_;
    }
    const Shape& input_shape() const
    {
        return input_shape_;
    }
    const std::vector<LayerSpec>& layers() const
    {
        return layers_;
    }
    /// Output shape of every layer, in order.
    const std::vector<Shape>& output_shapes() const
    {
        return shapes_;
    }
    /// Input shape seen by layer `index`.
    const Shape& layer_input_shape(std::size_t index) const
    {
        return index == 0 ? input_shape_ : shapes_[index - 1];
    }
    const std::vector<WeightLayout>& weight_layout() const
    {
        return layout_;
    }

    bool has_weights() const
    {
        return !weights_.empty();
    }
    const std::vector<LayerWeights>& weights() const
    {
        return weights_;
    }
    /// Replaces all weights; sizes must match weight_layout().
    void set_weights(std::vector<LayerWeights> weights);
    void set_layer_weights(std::size_t index, LayerWeights weights);
    /// Direct access for optimizers. Callers must keep every vector's length unchanged.
    std::vector<LayerWeights>& mutable_weights();

    /// Same graph with the trainable flag of parameterized layers overridden.
    void set_trainable(std::size_t index, bool trainable);

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

private:
    std::string id_;
    Family family_;
    HyperParams hyper_;
    Shape input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<Shape> shapes_;
    std::vector<WeightLayout> layout_;
    std::vector<LayerWeights> weights_;
};

// Canonical family builders. Each block is conv (or depthwise conv) -> relu -> 2x2 max pool, and every
// family ends in flatten -> dense(o) -> softmax.

ModelSpec build_conv2d_family(const HyperParams& h);
ModelSpec build_depthwise_family(const HyperParams& h);
/// Conv -> relu -> conv -> relu -> conv -> add(skip from first relu) -> relu -> pool -> head.
ModelSpec build_resnet_single_block(int filters, int image, int outputs);
/// Depthwise-separable benchmarking stand-in: alpha in {0.25, 0.5, 0.75, 1.0}, image in {128, 160, 192, 224}.
ModelSpec build_mobilenet_like(double alpha, int image, int outputs);

/// Channel counts of the stem and the 13 separable stages of build_mobilenet_like at the given alpha.
std::vector<int> mobilenet_like_channels(double alpha);

/// Builds the canonical model for `family`; used by the generator and the file loader.
ModelSpec build_family(Family family, const HyperParams& h);

std::string model_id(Family family, const HyperParams& h);

std::int64_t count_parameters(const ModelSpec& spec);
std::int64_t count_trainable_parameters(const ModelSpec& spec);
std::vector<Shape> output_shapes(const ModelSpec& spec);

/// Spatial edge after `blocks` floor-halvings of `image`.
int final_feature_edge(int image, int blocks);

}    // namespace edgecnn
