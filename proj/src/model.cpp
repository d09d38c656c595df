//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/model.hpp"

#include "edgecnn/errors.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace edgecnn
{

namespace
{

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::array<double, 4> kMobileNetAlphas = { 0.25, 0.5, 0.75, 1.0 };
constexpr std::array<int, 4> kMobileNetImages    = { 128, 160, 192, 224 };

// Stem plus the 13 pointwise widths of MobileNet v1 at alpha 1.
constexpr std::array<int, 14> kMobileNetBaseChannels = { 32,  64,  128, 128, 256, 256,  512,
                                                         512, 512, 512, 512, 512, 1024, 1024 };

bool stage_downsamples(int stage)
{
    return stage == 1 || stage == 3 || stage == 5 || stage == 11;
}

std::string layer_error(std::size_t index, const LayerSpec& layer, const std::string& what)
{
    return "layer " + std::to_string(index) + " (" + layer_type_name(layer) + "): " + what;
}

}    // namespace

std::string to_string(Family family)
{
    switch (family)
    {
        case Family::Conv2D:
            return "conv2d";
        case Family::Depthwise:
            return "depthwise";
        case Family::ResNet1:
            return "resnet1";
        case Family::MobileNetLike:
            return "mobilenet_like";
    }
    return "unknown";
}

Family parse_family(const std::string& name)
{
    if (name == "conv2d")
    {
        return Family::Conv2D;
    }
    if (name == "depthwise")
    {
        return Family::Depthwise;
    }
    if (name == "resnet1")
    {
        return Family::ResNet1;
    }
    if (name == "mobilenet_like")
    {
        return Family::MobileNetLike;
    }
    throw ParameterError("unknown model family '" + name + "'");
}

void HyperParams::validate() const
{
    if (blocks <= 0 || image <= 0)
    {
        throw ParameterError("blocks and image must be positive");
    }
    if (filters < 0)
    {
        throw ParameterError("filters must not be negative");
    }
    if (outputs < 2)
    {
        throw ParameterError("outputs must be at least 2, got " + std::to_string(outputs));
    }
    if (!(alpha > 0.0))
    {
        throw ParameterError("alpha must be positive");
    }
}

std::string layer_type_name(const LayerSpec& layer)
{
    return std::visit(Overloaded{
                          [](const Conv2DLayer&) { return "conv2d"; },
                          [](const DepthwiseConv2DLayer&) { return "depthwise_conv2d"; },
                          [](const MaxPoolLayer&) { return "max_pool"; },
                          [](const FlattenLayer&) { return "flatten"; },
                          [](const DenseLayer&) { return "dense"; },
                          [](const ReluLayer&) { return "relu"; },
                          [](const SoftmaxLayer&) { return "softmax"; },
                          [](const AddLayer&) { return "add"; },
                      },
                      layer);
}

bool has_parameters(const LayerSpec& layer)
{
    return std::holds_alternative<Conv2DLayer>(layer) || std::holds_alternative<DepthwiseConv2DLayer>(layer) ||
           std::holds_alternative<DenseLayer>(layer);
}

bool is_trainable(const LayerSpec& layer)
{
    return std::visit(Overloaded{
                          [](const Conv2DLayer& l) { return l.trainable; },
                          [](const DepthwiseConv2DLayer& l) { return l.trainable; },
                          [](const DenseLayer& l) { return l.trainable; },
                          [](const auto&) { return false; },
                      },
                      layer);
}

ModelSpec::ModelSpec(std::string id, Family family, HyperParams hyper, Shape input_shape,
                     std::vector<LayerSpec> layers)
    : id_(std::move(id))
    , family_(family)
    , hyper_(hyper)
    , input_shape_(std::move(input_shape))
    , layers_(std::move(layers))
{
    if (input_shape_.rank() != 3)
    {
        throw ShapeError("model input must be rank 3, got " + input_shape_.str());
    }
    if (layers_.empty())
    {
        throw InfeasibleArchitectureError("model has no layers");
    }

    shapes_.reserve(layers_.size());
    layout_.reserve(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i)
    {
        const LayerSpec& layer = layers_[i];
        const Shape& in        = layer_input_shape(i);
        WeightLayout wl;

        auto need_rank = [&](int rank) {
            if (in.rank() != rank)
            {
                throw InfeasibleArchitectureError(
                    layer_error(i, layer, "expects rank " + std::to_string(rank) + " input, got " + in.str()));
            }
        };
        auto check_kernel = [&](int k) {
            if (k <= 0 || k % 2 == 0)
            {
                throw InfeasibleArchitectureError(layer_error(i, layer, "kernel size must be odd and positive"));
            }
        };

        Shape out = std::visit(
            Overloaded{
                [&](const Conv2DLayer& l) {
                    need_rank(3);
                    check_kernel(l.kernel);
                    if (l.filters <= 0)
                    {
                        throw InfeasibleArchitectureError(layer_error(i, layer, "filters must be positive"));
                    }
                    KernelShape k{ l.kernel, l.kernel, in.channels(), l.filters };
                    wl = { k.conv_weights(), static_cast<std::size_t>(l.filters) };
                    return Shape::hwc(in.height(), in.width(), l.filters);
                },
                [&](const DepthwiseConv2DLayer& l) {
                    need_rank(3);
                    check_kernel(l.kernel);
                    KernelShape k{ l.kernel, l.kernel, in.channels(), in.channels() };
                    wl = { k.depthwise_weights(), static_cast<std::size_t>(in.channels()) };
                    return in;
                },
                [&](const MaxPoolLayer&) {
                    need_rank(3);
                    if (in.height() < 2 || in.width() < 2)
                    {
                        throw InfeasibleArchitectureError(
                            layer_error(i, layer, "feature map " + in.str() + " is too small to pool"));
                    }
                    return Shape::hwc(in.height() / 2, in.width() / 2, in.channels());
                },
                [&](const FlattenLayer&) { return Shape::vec(static_cast<int>(in.elements())); },
                [&](const DenseLayer& l) {
                    need_rank(1);
                    if (l.units <= 0)
                    {
                        throw InfeasibleArchitectureError(layer_error(i, layer, "units must be positive"));
                    }
                    wl = { static_cast<std::size_t>(in[0]) * static_cast<std::size_t>(l.units),
                           static_cast<std::size_t>(l.units) };
                    return Shape::vec(l.units);
                },
                [&](const ReluLayer&) { return in; },
                [&](const SoftmaxLayer&) {
                    need_rank(1);
                    return in;
                },
                [&](const AddLayer& l) {
                    if (l.skip_source < 0 || static_cast<std::size_t>(l.skip_source) >= i)
                    {
                        throw InfeasibleArchitectureError(
                            layer_error(i, layer, "skip source must be an earlier layer"));
                    }
                    const Shape& skip = shapes_[static_cast<std::size_t>(l.skip_source)];
                    if (skip != in)
                    {
                        throw InfeasibleArchitectureError(layer_error(
                            i, layer, "skip source shape " + skip.str() + " differs from input " + in.str()));
                    }
                    return in;
                },
            },
            layer);

        shapes_.push_back(std::move(out));
        layout_.push_back(wl);
    }

    if (!std::holds_alternative<SoftmaxLayer>(layers_.back()))
    {
        throw InfeasibleArchitectureError("final layer must be softmax");
    }
    if (shapes_.back() != Shape::vec(hyper_.outputs))
    {
        throw InfeasibleArchitectureError("model output " + shapes_.back().str() + " does not match " +
                                          std::to_string(hyper_.outputs) + " outputs");
    }
}

void ModelSpec::set_weights(std::vector<LayerWeights> weights)
{
    if (weights.size() != layers_.size())
    {
        throw ShapeError("expected weights for " + std::to_string(layers_.size()) + " layers, got " +
                         std::to_string(weights.size()));
    }
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        if (weights[i].kernel.size() != layout_[i].kernel || weights[i].bias.size() != layout_[i].bias)
        {
            throw ShapeError(layer_error(i, layers_[i],
                                         "expected " + std::to_string(layout_[i].kernel) + "+" +
                                             std::to_string(layout_[i].bias) + " weights, got " +
                                             std::to_string(weights[i].kernel.size()) + "+" +
                                             std::to_string(weights[i].bias.size())));
        }
    }
    weights_ = std::move(weights);
}

void ModelSpec::set_layer_weights(std::size_t index, LayerWeights weights)
{
    if (!has_weights())
    {
        throw ShapeError("model has no weights to replace");
    }
    if (index >= layers_.size() || weights.kernel.size() != layout_[index].kernel ||
        weights.bias.size() != layout_[index].bias)
    {
        throw ShapeError("layer weight replacement does not match layout at index " + std::to_string(index));
    }
    weights_[index] = std::move(weights);
}

std::vector<LayerWeights>& ModelSpec::mutable_weights()
{
    if (!has_weights())
    {
        throw ShapeError("model " + id_ + " has no weights");
    }
    return weights_;
}

void ModelSpec::set_trainable(std::size_t index, bool trainable)
{
    std::visit(Overloaded{
                   [&](Conv2DLayer& l) { l.trainable = trainable; },
                   [&](DepthwiseConv2DLayer& l) { l.trainable = trainable; },
                   [&](DenseLayer& l) { l.trainable = trainable; },
                   [](auto&) {},
               },
               layers_.at(index));
}

std::string model_id(Family family, const HyperParams& h)
{
    std::ostringstream os;
    os << to_string(family);
    switch (family)
    {
        case Family::Conv2D:
            os << "_b" << h.blocks << "_f" << h.filters;
            break;
        case Family::Depthwise:
            os << "_b" << h.blocks;
            break;
        case Family::ResNet1:
            os << "_f" << h.filters;
            break;
        case Family::MobileNetLike:
            os << "_a" << h.alpha;
            break;
    }
    os << "_i" << h.image << "_o" << h.outputs;
    return os.str();
}

namespace
{

std::vector<LayerSpec> classification_head(int outputs)
{
    return { FlattenLayer{}, DenseLayer{ outputs }, SoftmaxLayer{} };
}

ModelSpec build_blocks(Family family, HyperParams h, const LayerSpec& conv)
{
    h.alpha = 1.0;
    h.validate();
    std::vector<LayerSpec> layers;
    for (int b = 0; b < h.blocks; ++b)
    {
        layers.push_back(conv);
        layers.push_back(ReluLayer{});
        layers.push_back(MaxPoolLayer{});
    }
    for (auto& l : classification_head(h.outputs))
    {
        layers.push_back(std::move(l));
    }
    return ModelSpec(model_id(family, h), family, h, Shape::hwc(h.image, h.image, 3), std::move(layers));
}

}    // namespace

ModelSpec build_conv2d_family(const HyperParams& h)
{
    if (h.filters <= 0)
    {
        throw ParameterError("conv2d family needs a positive filter count");
    }
    return build_blocks(Family::Conv2D, h, Conv2DLayer{ h.filters });
}

ModelSpec build_depthwise_family(const HyperParams& h)
{
    HyperParams hp = h;
    hp.filters     = 0;
    return build_blocks(Family::Depthwise, hp, DepthwiseConv2DLayer{});
}

ModelSpec build_resnet_single_block(int filters, int image, int outputs)
{
    if (image < 8)
    {
        throw ParameterError("resnet1 needs an input edge of at least 8, got " + std::to_string(image));
    }
    if (filters <= 0)
    {
        throw ParameterError("resnet1 needs a positive filter count");
    }
    HyperParams h{ 1, filters, image, outputs };
    h.validate();
    std::vector<LayerSpec> layers = {
        Conv2DLayer{ filters }, ReluLayer{},       Conv2DLayer{ filters }, ReluLayer{},
        Conv2DLayer{ filters }, AddLayer{ 1 },     ReluLayer{},            MaxPoolLayer{},
        FlattenLayer{},         DenseLayer{ outputs }, SoftmaxLayer{},
    };
    return ModelSpec(model_id(Family::ResNet1, h), Family::ResNet1, h, Shape::hwc(image, image, 3),
                     std::move(layers));
}

std::vector<int> mobilenet_like_channels(double alpha)
{
    bool supported = false;
    for (double a : kMobileNetAlphas)
    {
        supported = supported || std::abs(a - alpha) < 1e-9;
    }
    if (!supported)
    {
        throw ParameterError("mobilenet_like alpha must be one of 0.25, 0.5, 0.75, 1.0");
    }
    std::vector<int> channels;
    for (int c : kMobileNetBaseChannels)
    {
        channels.push_back(static_cast<int>(std::lround(c * alpha)));
    }
    return channels;
}

ModelSpec build_mobilenet_like(double alpha, int image, int outputs)
{
    const std::vector<int> channels = mobilenet_like_channels(alpha);
    bool image_ok                   = false;
    for (int i : kMobileNetImages)
    {
        image_ok = image_ok || i == image;
    }
    if (!image_ok)
    {
        throw ParameterError("mobilenet_like image must be one of 128, 160, 192, 224");
    }

    HyperParams h{ 13, channels[0], image, outputs, alpha };
    h.validate();

    std::vector<LayerSpec> layers = { Conv2DLayer{ channels[0] }, ReluLayer{}, MaxPoolLayer{} };
    int edge                      = image / 2;
    for (int stage = 0; stage < 13; ++stage)
    {
        if (stage_downsamples(stage))
        {
            layers.push_back(MaxPoolLayer{});
            edge /= 2;
        }
        layers.push_back(DepthwiseConv2DLayer{});
        layers.push_back(ReluLayer{});
        layers.push_back(Conv2DLayer{ channels[static_cast<std::size_t>(stage) + 1], 1 });
        layers.push_back(ReluLayer{});
    }
    while (edge > 1)
    {
        layers.push_back(MaxPoolLayer{});
        edge /= 2;
    }
    for (auto& l : classification_head(outputs))
    {
        layers.push_back(std::move(l));
    }
    return ModelSpec(model_id(Family::MobileNetLike, h), Family::MobileNetLike, h, Shape::hwc(image, image, 3),
                     std::move(layers));
}

ModelSpec build_family(Family family, const HyperParams& h)
{
    switch (family)
    {
        case Family::Conv2D:
            return build_conv2d_family(h);
        case Family::Depthwise:
            return build_depthwise_family(h);
        case Family::ResNet1:
            return build_resnet_single_block(h.filters, h.image, h.outputs);
        case Family::MobileNetLike:
            return build_mobilenet_like(h.alpha, h.image, h.outputs);
    }
    throw ParameterError("unknown family");
}

std::int64_t count_parameters(const ModelSpec& spec)
{
    std::int64_t total = 0;
    for (const WeightLayout& wl : spec.weight_layout())
    {
        total += static_cast<std::int64_t>(wl.kernel + wl.bias);
    }
    return total;
}

std::int64_t count_trainable_parameters(const ModelSpec& spec)
{
    std::int64_t total = 0;
    for (std::size_t i = 0; i < spec.layers().size(); ++i)
    {
        if (is_trainable(spec.layers()[i]))
        {
            total += static_cast<std::int64_t>(spec.weight_layout()[i].kernel + spec.weight_layout()[i].bias);
        }
    }
    return total;
}

std::vector<Shape> output_shapes(const ModelSpec& spec)
{
    return spec.output_shapes();
}

int final_feature_edge(int image, int blocks)
{
    int edge = image;
    for (int b = 0; b < blocks && edge > 0; ++b)
    {
        edge /= 2;
    }
    return edge;
}

}    // namespace edgecnn
