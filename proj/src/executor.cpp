//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/executor.hpp"

#include "edgecnn/errors.hpp"

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

void check_input(const ModelSpec& spec, const Tensor& input)
{
    if (!spec.has_weights())
    {
        throw ShapeError("model " + spec.id() + " has no weights");
    }
    if (input.shape() != spec.input_shape())
    {
        throw ShapeError("input " + input.shape().str() + " does not match model input " + spec.input_shape().str());
    }
}

}    // namespace

Tensor apply_layer(const ModelSpec& spec, std::size_t index, const Tensor& input,
                   const std::vector<Tensor>& earlier_outputs)
{
    const LayerWeights& w = spec.weights()[index];
    return std::visit(Overloaded{
                          [&](const Conv2DLayer& l) {
                              KernelShape k{ l.kernel, l.kernel, input.shape().channels(), l.filters };
                              return conv2d(input, k, w.kernel, w.bias);
                          },
                          [&](const DepthwiseConv2DLayer& l) {
                              const int c = input.shape().channels();
                              return depthwise_conv2d(input, KernelShape{ l.kernel, l.kernel, c, c }, w.kernel, w.bias);
                          },
                          [&](const MaxPoolLayer&) { return max_pool(input); },
                          [&](const FlattenLayer&) { return flatten(input); },
                          [&](const DenseLayer&) { return dense(input, w.kernel, w.bias); },
                          [&](const ReluLayer&) { return relu(input); },
                          [&](const SoftmaxLayer&) { return softmax(input); },
                          [&](const AddLayer& l) {
                              return add(input, earlier_outputs.at(static_cast<std::size_t>(l.skip_source)));
                          },
                      },
                      spec.layers()[index]);
}

std::vector<Tensor> forward_trace(const ModelSpec& spec, const Tensor& input)
{
    check_input(spec, input);
    std::vector<Tensor> outputs;
    outputs.reserve(spec.layers().size());
    for (std::size_t i = 0; i < spec.layers().size(); ++i)
    {
        const Tensor& in = i == 0 ? input : outputs.back();
        outputs.push_back(apply_layer(spec, i, in, outputs));
    }
    return outputs;
}

Tensor forward(const ModelSpec& spec, const Tensor& input)
{
    check_input(spec, input);
    // Keep only what a later Add still needs.
    std::vector<bool> needed(spec.layers().size(), false);
    for (const LayerSpec& l : spec.layers())
    {
        if (const auto* a = std::get_if<AddLayer>(&l))
        {
            needed[static_cast<std::size_t>(a->skip_source)] = true;
        }
    }

    std::vector<Tensor> kept(spec.layers().size());
    Tensor current = input;
    for (std::size_t i = 0; i < spec.layers().size(); ++i)
    {
        current = apply_layer(spec, i, current, kept);
        if (needed[i])
        {
            kept[i] = current;
        }
    }
    return current;
}

}    // namespace edgecnn
