//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/tensor.hpp"

#include "edgecnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edgecnn
{

Shape::Shape(std::initializer_list<int> dims)
    : Shape(std::vector<int>(dims))
{}

Shape::Shape(std::vector<int> dims)
    : dims_(std::move(dims))
{
    if (dims_.size() != 1 && dims_.size() != 3)
    {
        throw ShapeError("tensor rank must be 1 or 3, got " + std::to_string(dims_.size()));
    }
    for (int d : dims_)
    {
        if (d <= 0)
        {
            throw ShapeError("tensor dimensions must be positive: " + str());
        }
    }
}

std::size_t Shape::elements() const
{
    if (dims_.empty())
    {
        return 0;
    }
    std::size_t n = 1;
    for (int d : dims_)
    {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

int Shape::height() const
{
    if (rank() != 3)
    {
        throw ShapeError("expected a rank-3 tensor, got " + str());
    }
    return dims_[0];
}

int Shape::width() const
{
    if (rank() != 3)
    {
        throw ShapeError("expected a rank-3 tensor, got " + str());
    }
    return dims_[1];
}

int Shape::channels() const
{
    if (rank() != 3)
    {
        throw ShapeError("expected a rank-3 tensor, got " + str());
    }
    return dims_[2];
}

std::string Shape::str() const
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i)
    {
        os << (i ? "x" : "") << dims_[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, float fill)
    : shape_(std::move(shape))
    , data_(shape_.elements(), fill)
{}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape))
    , data_(std::move(data))
{
    if (data_.size() != shape_.elements())
    {
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_.str());
    }
}

Tensor Tensor::reshaped(Shape shape) const
{
    return Tensor(std::move(shape), data_);
}

namespace
{

void check_conv_operands(const Tensor& input, const KernelShape& kernel, std::size_t weight_count,
                         std::size_t expected_weights, std::size_t bias_count, const char* op)
{
    const Shape& s = input.shape();
    if (s.rank() != 3)
    {
        throw ShapeError(std::string(op) + ": input must be rank 3, got " + s.str());
    }
    if (s.channels() != kernel.in_channels)
    {
        throw ShapeError(std::string(op) + ": input " + s.str() + " has " + std::to_string(s.channels()) +
                         " channels but kernel " + std::to_string(kernel.height) + "x" +
                         std::to_string(kernel.width) + "x" + std::to_string(kernel.in_channels) + "x" +
                         std::to_string(kernel.out_channels) + " expects " + std::to_string(kernel.in_channels));
    }
    if (kernel.height <= 0 || kernel.width <= 0 || kernel.out_channels <= 0)
    {
        throw ShapeError(std::string(op) + ": kernel dimensions must be positive");
    }
    if (weight_count != expected_weights)
    {
        throw ShapeError(std::string(op) + ": expected " + std::to_string(expected_weights) + " weights, got " +
                         std::to_string(weight_count));
    }
    if (bias_count != static_cast<std::size_t>(kernel.out_channels))
    {
        throw ShapeError(std::string(op) + ": expected " + std::to_string(kernel.out_channels) +
                         " bias values, got " + std::to_string(bias_count));
    }
}

}    // namespace

Tensor conv2d(const Tensor& input, const KernelShape& kernel, std::span<const float> weights,
              std::span<const float> bias)
{
    check_conv_operands(input, kernel, weights.size(), kernel.conv_weights(), bias.size(), "conv2d");

    const int h    = input.shape().height();
    const int w    = input.shape().width();
    const int cin  = kernel.in_channels;
    const int cout = kernel.out_channels;
    const int pad_y = (kernel.height - 1) / 2;
    const int pad_x = (kernel.width - 1) / 2;

    Tensor out(Shape::hwc(h, w, cout));
    const float* in = input.data().data();
    float* dst      = out.data().data();

    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            float* acc = dst + (static_cast<std::size_t>(y) * w + x) * cout;
            std::copy(bias.begin(), bias.end(), acc);
            for (int ky = 0; ky < kernel.height; ++ky)
            {
                const int sy = y + ky - pad_y;
                if (sy < 0 || sy >= h)
                {
                    continue;
                }
                for (int kx = 0; kx < kernel.width; ++kx)
                {
                    const int sx = x + kx - pad_x;
                    if (sx < 0 || sx >= w)
                    {
                        continue;
                    }
                    const float* px = in + (static_cast<std::size_t>(sy) * w + sx) * cin;
                    const float* wk = weights.data() + (static_cast<std::size_t>(ky) * kernel.width + kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci)
                    {
                        const float v     = px[ci];
                        const float* wrow = wk + static_cast<std::size_t>(ci) * cout;
                        for (int co = 0; co < cout; ++co)
                        {
                            acc[co] += v * wrow[co];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor depthwise_conv2d(const Tensor& input, const KernelShape& kernel, std::span<const float> weights,
                        std::span<const float> bias)
{
    if (kernel.out_channels != kernel.in_channels)
    {
        throw ShapeError("depthwise_conv2d: depth multiplier must be 1 (in " + std::to_string(kernel.in_channels) +
                         ", out " + std::to_string(kernel.out_channels) + ")");
    }
    check_conv_operands(input, kernel, weights.size(), kernel.depthwise_weights(), bias.size(),
                        "depthwise_conv2d");

    const int h     = input.shape().height();
    const int w     = input.shape().width();
    const int c     = kernel.in_channels;
    const int pad_y = (kernel.height - 1) / 2;
    const int pad_x = (kernel.width - 1) / 2;

    Tensor out(Shape::hwc(h, w, c));
    const float* in = input.data().data();
    float* dst      = out.data().data();

    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            float* acc = dst + (static_cast<std::size_t>(y) * w + x) * c;
            std::copy(bias.begin(), bias.end(), acc);
            for (int ky = 0; ky < kernel.height; ++ky)
            {
                const int sy = y + ky - pad_y;
                if (sy < 0 || sy >= h)
                {
                    continue;
                }
                for (int kx = 0; kx < kernel.width; ++kx)
                {
                    const int sx = x + kx - pad_x;
                    if (sx < 0 || sx >= w)
                    {
                        continue;
                    }
                    const float* px = in + (static_cast<std::size_t>(sy) * w + sx) * c;
                    const float* wk = weights.data() + (static_cast<std::size_t>(ky) * kernel.width + kx) * c;
                    for (int ch = 0; ch < c; ++ch)
                    {
                        acc[ch] += px[ch] * wk[ch];
                    }
                }
            }
        }
    }
    return out;
}

Tensor max_pool(const Tensor& input)
{
    const Shape& s = input.shape();
    if (s.rank() != 3)
    {
        throw ShapeError("max_pool: input must be rank 3, got " + s.str());
    }
    if (s.height() < 2 || s.width() < 2)
    {
        throw DegenerateInputError("max_pool: spatial size " + s.str() + " is below the 2x2 window");
    }
    const int oh = s.height() / 2;
    const int ow = s.width() / 2;
    const int c  = s.channels();

    Tensor out(Shape::hwc(oh, ow, c));
    for (int y = 0; y < oh; ++y)
    {
        for (int x = 0; x < ow; ++x)
        {
            for (int ch = 0; ch < c; ++ch)
            {
                const float a = input.at(2 * y, 2 * x, ch);
                const float b = input.at(2 * y, 2 * x + 1, ch);
                const float d = input.at(2 * y + 1, 2 * x, ch);
                const float e = input.at(2 * y + 1, 2 * x + 1, ch);
                out.at(y, x, ch) = std::max(std::max(a, b), std::max(d, e));
            }
        }
    }
    return out;
}

Tensor dense(const Tensor& input, std::span<const float> weights, std::span<const float> bias)
{
    if (input.shape().rank() != 1)
    {
        throw ShapeError("dense: input must be rank 1, got " + input.shape().str());
    }
    const std::size_t n = input.size();
    const std::size_t m = bias.size();
    if (m == 0 || weights.size() != n * m)
    {
        throw ShapeError("dense: input length " + std::to_string(n) + " does not match weights of " +
                         std::to_string(weights.size()) + " elements for " + std::to_string(m) + " units");
    }

    // Flatten heads can have hundreds of thousands of inputs, so sum in double.
    std::vector<double> acc(bias.begin(), bias.end());
    for (std::size_t k = 0; k < n; ++k)
    {
        const double v    = input[k];
        const float* wrow = weights.data() + k * m;
        for (std::size_t j = 0; j < m; ++j)
        {
            acc[j] += v * wrow[j];
        }
    }
    return Tensor(Shape::vec(static_cast<int>(m)), std::vector<float>(acc.begin(), acc.end()));
}

Tensor relu(const Tensor& input)
{
    Tensor out = input;
    for (float& v : out.data())
    {
        v = v > 0.0f ? v : 0.0f;
    }
    return out;
}

Tensor softmax(const Tensor& input)
{
    if (input.shape().rank() != 1)
    {
        throw ShapeError("softmax: input must be rank 1, got " + input.shape().str());
    }
    const auto values = input.data();
    const float peak  = *std::max_element(values.begin(), values.end());

    Tensor out(input.shape());
    float total = 0.0f;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        out[i] = std::exp(values[i] - peak);
        total += out[i];
    }
    for (float& v : out.data())
    {
        v /= total;
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape())
    {
        throw ShapeError("add: shapes differ, " + a.shape().str() + " vs " + b.shape().str());
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] += b[i];
    }
    return out;
}

Tensor flatten(const Tensor& input)
{
    return input.reshaped(Shape::vec(static_cast<int>(input.size())));
}

}    // namespace edgecnn
