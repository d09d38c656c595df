//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/trainer.hpp"

#include "edgecnn/errors.hpp"
#include "edgecnn/executor.hpp"
#include "edgecnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

namespace edgecnn
{

void TrainConfig::validate() const
{
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    {
        throw ParameterError("learning rate must be a finite non-negative number");
    }
    if (!(momentum >= 0.0 && momentum < 1.0))
    {
        throw ParameterError("momentum must be within [0, 1)");
    }
    if (batch_size < 1)
    {
        throw ParameterError("batch size must be at least 1");
    }
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    {
        throw ParameterError("weight decay must be a finite non-negative number");
    }
    if (epochs < 0)
    {
        throw ParameterError("epochs must not be negative");
    }
}

double cross_entropy(const Tensor& scores, std::span<const float> target)
{
    if (scores.shape().rank() != 1 || scores.size() != target.size())
    {
        throw ShapeError("cross_entropy: scores " + scores.shape().str() + " vs target of " +
                         std::to_string(target.size()));
    }
    const auto z      = scores.data();
    const double peak = *std::max_element(z.begin(), z.end());
    double sum        = 0.0;
    for (float v : z)
    {
        sum += std::exp(static_cast<double>(v) - peak);
    }
    const double log_norm = peak + std::log(sum);
    double loss           = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k)
    {
        if (target[k] != 0.0f)
        {
            loss += static_cast<double>(target[k]) * (log_norm - static_cast<double>(z[k]));
        }
    }
    return loss;
}

namespace
{

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void conv2d_backward(const Tensor& in, const Tensor& dout, const KernelShape& k, std::span<const float> w,
                     LayerWeights& grad, Tensor& din)
{
    const int h     = in.shape().height();
    const int width = in.shape().width();
    const int cin   = k.in_channels;
    const int cout  = k.out_channels;
    const int pad_y = (k.height - 1) / 2;
    const int pad_x = (k.width - 1) / 2;

    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            const float* g = dout.data().data() + (static_cast<std::size_t>(y) * width + x) * cout;
            for (int co = 0; co < cout; ++co)
            {
                grad.bias[static_cast<std::size_t>(co)] += g[co];
            }
            for (int ky = 0; ky < k.height; ++ky)
            {
                const int sy = y + ky - pad_y;
                if (sy < 0 || sy >= h)
                {
                    continue;
                }
                for (int kx = 0; kx < k.width; ++kx)
                {
                    const int sx = x + kx - pad_x;
                    if (sx < 0 || sx >= width)
                    {
                        continue;
                    }
                    const std::size_t pix = (static_cast<std::size_t>(sy) * width + sx) * cin;
                    const float* px       = in.data().data() + pix;
                    float* dpx            = din.data().data() + pix;
                    const std::size_t tap = (static_cast<std::size_t>(ky) * k.width + kx) * cin * cout;
                    for (int ci = 0; ci < cin; ++ci)
                    {
                        const float* wrow = w.data() + tap + static_cast<std::size_t>(ci) * cout;
                        float* grow       = grad.kernel.data() + tap + static_cast<std::size_t>(ci) * cout;
                        const float v     = px[ci];
                        float acc         = 0.0f;
                        for (int co = 0; co < cout; ++co)
                        {
                            grow[co] += v * g[co];
                            acc += wrow[co] * g[co];
                        }
                        dpx[ci] += acc;
                    }
                }
            }
        }
    }
}

void depthwise_backward(const Tensor& in, const Tensor& dout, const KernelShape& k, std::span<const float> w,
                        LayerWeights& grad, Tensor& din)
{
    const int h     = in.shape().height();
    const int width = in.shape().width();
    const int c     = k.in_channels;
    const int pad_y = (k.height - 1) / 2;
    const int pad_x = (k.width - 1) / 2;

    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < width; ++x)
        {
            const float* g = dout.data().data() + (static_cast<std::size_t>(y) * width + x) * c;
            for (int ch = 0; ch < c; ++ch)
            {
                grad.bias[static_cast<std::size_t>(ch)] += g[ch];
            }
            for (int ky = 0; ky < k.height; ++ky)
            {
                const int sy = y + ky - pad_y;
                if (sy < 0 || sy >= h)
                {
                    continue;
                }
                for (int kx = 0; kx < k.width; ++kx)
                {
                    const int sx = x + kx - pad_x;
                    if (sx < 0 || sx >= width)
                    {
                        continue;
                    }
                    const std::size_t pix = (static_cast<std::size_t>(sy) * width + sx) * c;
                    const std::size_t tap = (static_cast<std::size_t>(ky) * k.width + kx) * c;
                    for (int ch = 0; ch < c; ++ch)
                    {
                        grad.kernel[tap + static_cast<std::size_t>(ch)] += in[pix + static_cast<std::size_t>(ch)] * g[ch];
                        din[pix + static_cast<std::size_t>(ch)] += w[tap + static_cast<std::size_t>(ch)] * g[ch];
                    }
                }
            }
        }
    }
}

void max_pool_backward(const Tensor& in, const Tensor& dout, Tensor& din)
{
    const int oh = dout.shape().height();
    const int ow = dout.shape().width();
    const int c  = dout.shape().channels();
    for (int y = 0; y < oh; ++y)
    {
        for (int x = 0; x < ow; ++x)
        {
            for (int ch = 0; ch < c; ++ch)
            {
                // First maximal element in scan order wins.
                int by     = 2 * y;
                int bx     = 2 * x;
                float best = in.at(by, bx, ch);
                for (int dy = 0; dy < 2; ++dy)
                {
                    for (int dx = 0; dx < 2; ++dx)
                    {
                        const float v = in.at(2 * y + dy, 2 * x + dx, ch);
                        if (v > best)
                        {
                            best = v;
                            by   = 2 * y + dy;
                            bx   = 2 * x + dx;
                        }
                    }
                }
                din.at(by, bx, ch) += dout.at(y, x, ch);
            }
        }
    }
}

void dense_backward(const Tensor& in, const Tensor& dout, std::span<const float> w, LayerWeights& grad, Tensor& din)
{
    const std::size_t n = in.size();
    const std::size_t m = dout.size();
    for (std::size_t j = 0; j < m; ++j)
    {
        grad.bias[j] += dout[j];
    }
    for (std::size_t k = 0; k < n; ++k)
    {
        const float v     = in[k];
        const float* wrow = w.data() + k * m;
        float* grow       = grad.kernel.data() + k * m;
        float acc         = 0.0f;
        for (std::size_t j = 0; j < m; ++j)
        {
            grow[j] += v * dout[j];
            acc += wrow[j] * dout[j];
        }
        din[k] += acc;
    }
}

void accumulate(Tensor& dst, const Tensor& src)
{
    for (std::size_t i = 0; i < dst.size(); ++i)
    {
        dst[i] += src[i];
    }
}

std::vector<LayerWeights> zero_like(const ModelSpec& model)
{
    std::vector<LayerWeights> g(model.layers().size());
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        g[i].kernel.assign(model.weight_layout()[i].kernel, 0.0f);
        g[i].bias.assign(model.weight_layout()[i].bias, 0.0f);
    }
    return g;
}

/// Reverse sweep from the pre-softmax scores. Parameter gradients are added into `accum`;
/// returns d/d input.
Tensor backprop(const ModelSpec& model, const Tensor& input, const std::vector<Tensor>& trace,
                const Tensor& score_grad, std::vector<LayerWeights>& accum)
{
    const auto& layers = model.layers();
    const std::size_t n = layers.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        if (std::holds_alternative<SoftmaxLayer>(layers[i]))
        {
            throw CapabilityError("softmax is only differentiable as the final layer (found at layer " +
                                  std::to_string(i) + ")");
        }
    }
    if (n < 2)
    {
        throw CapabilityError("model needs at least one layer before the softmax");
    }
    if (score_grad.shape() != trace[n - 2].shape())
    {
        throw ShapeError("score gradient " + score_grad.shape().str() + " does not match scores " +
                         trace[n - 2].shape().str());
    }

    // out_grad[i] = d/d output of layer i.
    std::vector<Tensor> out_grad(n);
    out_grad[n - 2] = score_grad;
    Tensor input_grad(input.shape());

    for (std::size_t idx = n - 1; idx-- > 0;)
    {
        if (out_grad[idx].size() == 0)
        {
            // Nothing downstream depends on this layer.
            continue;
        }
        const Tensor& g  = out_grad[idx];
        const Tensor& in = idx == 0 ? input : trace[idx - 1];
        Tensor din(in.shape());
        const LayerWeights& w = model.weights()[idx];

        std::visit(Overloaded{
                       [&](const Conv2DLayer& l) {
                           KernelShape k{ l.kernel, l.kernel, in.shape().channels(), l.filters };
                           conv2d_backward(in, g, k, w.kernel, accum[idx], din);
                       },
                       [&](const DepthwiseConv2DLayer& l) {
                           const int c = in.shape().channels();
                           depthwise_backward(in, g, KernelShape{ l.kernel, l.kernel, c, c }, w.kernel, accum[idx],
                                              din);
                       },
                       [&](const MaxPoolLayer&) { max_pool_backward(in, g, din); },
                       [&](const FlattenLayer&) { din = g.reshaped(in.shape()); },
                       [&](const DenseLayer&) { dense_backward(in, g, w.kernel, accum[idx], din); },
                       [&](const ReluLayer&) {
                           for (std::size_t k = 0; k < din.size(); ++k)
                           {
                               din[k] = in[k] > 0.0f ? g[k] : 0.0f;
                           }
                       },
                       [&](const SoftmaxLayer&) {},
                       [&](const AddLayer& l) {
                           din           = g;
                           const auto s  = static_cast<std::size_t>(l.skip_source);
                           Tensor& skip = out_grad[s];
                           if (skip.size() == 0)
                           {
                               skip = Tensor(trace[s].shape());
                           }
                           accumulate(skip, g);
                       },
                   },
                   layers[idx]);

        if (idx == 0)
        {
            accumulate(input_grad, din);
        }
        else if (out_grad[idx - 1].size() == 0)
        {
            out_grad[idx - 1] = std::move(din);
        }
        else
        {
            accumulate(out_grad[idx - 1], din);
        }
    }
    return input_grad;
}

Tensor scores_gradient(const Tensor& scores, std::span<const float> target)
{
    // d CE / d z = softmax(z) - target.
    Tensor p = softmax(scores);
    for (std::size_t k = 0; k < p.size(); ++k)
    {
        p[k] -= target[k];
    }
    return p;
}

std::vector<float> one_hot(int label, int classes)
{
    std::vector<float> t(static_cast<std::size_t>(classes), 0.0f);
    t[static_cast<std::size_t>(label)] = 1.0f;
    return t;
}

std::size_t argmax(std::span<const float> v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}    // namespace

Gradients backward_pass(const ModelSpec& model, const Tensor& input, std::span<const float> target)
{
    const std::vector<Tensor> trace = forward_trace(model, input);
    const Tensor& scores            = trace[trace.size() - 2];
    if (target.size() != scores.size())
    {
        throw ShapeError("target of " + std::to_string(target.size()) + " classes for a model with " +
                         std::to_string(scores.size()) + " outputs");
    }
    Gradients out;
    out.params = zero_like(model);
    out.input  = backprop(model, input, trace, scores_gradient(scores, target), out.params);
    out.loss   = cross_entropy(scores, target);
    return out;
}

Gradients backward_from_scores(const ModelSpec& model, const Tensor& input, const Tensor& score_grad)
{
    const std::vector<Tensor> trace = forward_trace(model, input);
    Gradients out;
    out.params = zero_like(model);
    out.input  = backprop(model, input, trace, score_grad, out.params);
    return out;
}

Metrics evaluate(const ModelSpec& model, std::span<const LabeledImage* const> items)
{
    Metrics m;
    double loss_sum = 0.0;
    for (const LabeledImage* item : items)
    {
        const std::vector<Tensor> trace = forward_trace(model, item->tensor);
        const Tensor& scores            = trace[trace.size() - 2];
        const auto target               = one_hot(item->label, static_cast<int>(scores.size()));
        loss_sum += cross_entropy(scores, target);
        if (argmax(trace.back().data()) == static_cast<std::size_t>(item->label))
        {
            ++m.correct;
        }
        ++m.total;
    }
    if (m.total > 0)
    {
        m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
        m.loss     = loss_sum / static_cast<double>(m.total);
    }
    return m;
}

Metrics evaluate(const ModelSpec& model, const Dataset& dataset, Split split)
{
    const auto items = dataset.split(split);
    return evaluate(model, items);
}

TrainResult train(ModelSpec model, const Dataset& dataset, const TrainConfig& config)
{
    config.validate();
    if (!model.has_weights())
    {
        throw ParameterError("model " + model.id() + " has no weights");
    }
    if (model.hyper().outputs != dataset.class_count())
    {
        throw ParameterError("model has " + std::to_string(model.hyper().outputs) + " outputs but the dataset has " +
                             std::to_string(dataset.class_count()) + " classes");
    }
    if (model.input_shape() != Shape::hwc(dataset.edge(), dataset.edge(), 3))
    {
        throw ShapeError("model input " + model.input_shape().str() + " does not match dataset edge " +
                         std::to_string(dataset.edge()));
    }

    const std::size_t n_layers = model.layers().size();
    std::vector<bool> frozen(n_layers);
    for (std::size_t i = 0; i < n_layers; ++i)
    {
        frozen[i] = !is_trainable(model.layers()[i]);
    }
    for (int f : config.freeze)
    {
        if (f < 0 || static_cast<std::size_t>(f) >= n_layers)
        {
            throw ParameterError("freeze index " + std::to_string(f) + " is out of range");
        }
        frozen[static_cast<std::size_t>(f)] = true;
    }

    const auto train_items = dataset.split(Split::Train);
    const auto val_items   = dataset.split(Split::Validation);
    if (train_items.empty())
    {
        throw DatasetError("training split is empty");
    }

    std::vector<LayerWeights> velocity = zero_like(model);
    TrainResult result{ model, {} };
    ModelSpec& m = result.model;

    std::vector<std::size_t> order(train_items.size());
    for (int epoch = 1; epoch <= config.epochs; ++epoch)
    {
        std::iota(order.begin(), order.end(), std::size_t{ 0 });
        SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i)
        {
            std::swap(order[i - 1], order[rng.below(i)]);
        }

        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size))
        {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<LayerWeights> grad = zero_like(m);
            double batch_loss              = 0.0;
            for (std::size_t k = start; k < stop; ++k)
            {
                const LabeledImage& item        = *train_items[order[k]];
                const std::vector<Tensor> trace = forward_trace(m, item.tensor);
                const Tensor& scores            = trace[trace.size() - 2];
                const auto target               = one_hot(item.label, static_cast<int>(scores.size()));
                batch_loss += cross_entropy(scores, target);
                backprop(m, item.tensor, trace, scores_gradient(scores, target), grad);
            }
            if (!std::isfinite(batch_loss))
            {
                throw TrainingError("training diverged (non-finite loss) in epoch " + std::to_string(epoch), epoch);
            }

            const float scale = 1.0f / static_cast<float>(stop - start);
            const auto lr     = static_cast<float>(config.learning_rate);
            const auto mu     = static_cast<float>(config.momentum);
            const auto decay  = static_cast<float>(config.weight_decay);
            auto& weights     = m.mutable_weights();
            for (std::size_t layer = 0; layer < n_layers; ++layer)
            {
                if (frozen[layer])
                {
                    continue;
                }
                auto step = [&](std::vector<float>& w, std::vector<float>& v, const std::vector<float>& g, float l2) {
                    for (std::size_t k = 0; k < w.size(); ++k)
                    {
                        v[k] = mu * v[k] + g[k] * scale + l2 * w[k];
                        w[k] -= lr * v[k];
                    }
                };
                step(weights[layer].kernel, velocity[layer].kernel, grad[layer].kernel, decay);
                step(weights[layer].bias, velocity[layer].bias, grad[layer].bias, 0.0f);
            }
        }

        EpochMetrics em;
        em.epoch      = epoch;
        em.train      = evaluate(m, train_items);
        em.validation = evaluate(m, val_items);
        if (!std::isfinite(em.train.loss))
        {
            throw TrainingError("training diverged (non-finite loss) after epoch " + std::to_string(epoch), epoch);
        }
        result.history.push_back(em);
    }
    return result;
}

SaliencyMap saliency(const ModelSpec& model, const Tensor& image, std::optional<int> target_class)
{
    const std::vector<Tensor> trace = forward_trace(model, image);
    const Tensor& scores            = trace[trace.size() - 2];
    const int cls = target_class ? *target_class : static_cast<int>(argmax(trace.back().data()));
    if (cls < 0 || static_cast<std::size_t>(cls) >= scores.size())
    {
        throw ParameterError("class " + std::to_string(cls) + " is out of range");
    }

    Tensor seed(scores.shape());
    seed[static_cast<std::size_t>(cls)] = 1.0f;
    std::vector<LayerWeights> unused    = zero_like(model);
    const Tensor grad                   = backprop(model, image, trace, seed, unused);

    const int h = image.shape().height();
    const int w = image.shape().width();
    const int c = image.shape().channels();
    SaliencyMap out;
    out.target_class = cls;
    out.map          = Tensor(Shape::hwc(h, w, 1));
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            float best = 0.0f;
            for (int ch = 0; ch < c; ++ch)
            {
                best = std::max(best, std::abs(grad.at(y, x, ch)));
            }
            out.map.at(y, x, 0) = best;
        }
    }

    const auto values   = out.map.data();
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const float lo      = *mn;
    const float hi      = *mx;
    if (hi == 0.0f)
    {
        out.zero_gradient = true;
        std::cerr << "warning: saliency gradient is zero everywhere for class " << cls << '\n';
        return out;
    }
    for (float& v : out.map.data())
    {
        v = hi > lo ? (v - lo) / (hi - lo) : 1.0f;
    }
    return out;
}

Tensor saliency_image(const SaliencyMap& map)
{
    Tensor img = map.map;
    for (float& v : img.data())
    {
        v = 255.0f * (1.0f - v);
    }
    return img;
}

void write_history_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.precision(10);
    out << "epoch,train_acc,train_loss,val_acc,val_loss\n";
    for (const auto& e : history)
    {
        out << e.epoch << ',' << e.train.accuracy << ',' << e.train.loss << ',' << e.validation.accuracy << ','
            << e.validation.loss << '\n';
    }
    if (!out)
    {
        throw IoError("write failed for " + path.string());
    }
}

}    // namespace edgecnn
