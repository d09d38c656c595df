//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace edgecnn
{

/// Tensor dimensions. Rank 1 (length) or rank 3 (height, width, channels).
class Shape
{
public:
    Shape() = default;
    Shape(std::initializer_list<int> dims);
    explicit Shape(std::vector<int> dims);

    static Shape vec(int n)
    {
        return Shape{ n };
    }
    static Shape hwc(int h, int w, int c)
    {
        return Shape{ h, w, c };
    }

    int rank() const
    {
        return static_cast<int>(dims_.size());
    }
    int operator[](int axis) const
    {
        return dims_.at(static_cast<std::size_t>(axis));
    }
    const std::vector<int>& dims() const
    {
        return dims_;
    }
    std::size_t elements() const;

    // Rank-3 accessors.
    int height() const;
    int width() const;
    int channels() const;

    std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    std::vector<int> dims_;
};

/// Dense float32 tensor, row-major height -> width -> channel.
class Tensor
{
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    const Shape& shape() const
    {
        return shape_;
    }
    std::size_t size() const
    {
        return data_.size();
    }
    std::span<float> data()
    {
        return data_;
    }
    std::span<const float> data() const
    {
        return data_;
    }
    float& operator[](std::size_t i)
    {
        return data_[i];
    }
    float operator[](std::size_t i) const
    {
        return data_[i];
    }

    float& at(int y, int x, int c)
    {
        return data_[index(y, x, c)];
    }
    float at(int y, int x, int c) const
    {
        return data_[index(y, x, c)];
    }

    /// Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t index(int y, int x, int c) const
    {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(shape_[1]) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(shape_[2]) +
               static_cast<std::size_t>(c);
    }

    Shape shape_;
    std::vector<float> data_;
};

/// Convolution kernel geometry. Weight layout is kh -> kw -> cin -> cout; depthwise kernels use
/// kh -> kw -> c with in_channels == out_channels.
struct KernelShape
{
    int height = 3;
    int width  = 3;
    int in_channels;
    int out_channels;

    std::size_t conv_weights() const
    {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(out_channels);
    }
    std::size_t depthwise_weights() const
    {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
               static_cast<std::size_t>(in_channels);
    }
};

// Forward kernels. Convolutions use "same" zero padding and stride 1; all accumulation is float32.

Tensor conv2d(const Tensor& input, const KernelShape& kernel, std::span<const float> weights,
              std::span<const float> bias);

/// Depth multiplier 1: channel c is filtered by its own kh x kw kernel only.
Tensor depthwise_conv2d(const Tensor& input, const KernelShape& kernel, std::span<const float> weights,
                        std::span<const float> bias);

/// 2x2 window, stride 2. Odd trailing rows/columns are dropped.
Tensor max_pool(const Tensor& input);

/// output(j) = bias(j) + sum_k input(k) * weights(k, j), weights stored n -> m.
Tensor dense(const Tensor& input, std::span<const float> weights, std::span<const float> bias);

Tensor relu(const Tensor& input);
Tensor softmax(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor flatten(const Tensor& input);

}    // namespace edgecnn
