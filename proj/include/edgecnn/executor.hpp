//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "edgecnn/model.hpp"
#include "edgecnn/tensor.hpp"

#include <vector>

namespace edgecnn
{

/// Runs the model on one image and returns the softmax output.
Tensor forward(const ModelSpec& spec, const Tensor& input);

/// Output of every layer in order. The last entry is the softmax output and the one
/// before it the pre-softmax scores.
std::vector<Tensor> forward_trace(const ModelSpec& spec, const Tensor& input);

/// Applies layer `index` of `spec` to `input`, given the outputs of all earlier layers
/// (needed by Add).
Tensor apply_layer(const ModelSpec& spec, std::size_t index, const Tensor& input,
                   const std::vector<Tensor>& earlier_outputs);

}    // namespace edgecnn
