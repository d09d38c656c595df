//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/errors.hpp"
#include "edgecnn/executor.hpp"
#include "edgecnn/generator.hpp"
#include "edgecnn/trainer.hpp"
#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace edgecnn;

namespace
{

/// h x w x 3 -> Flatten -> Dense(outputs) -> Softmax.
ModelSpec linear_model(int h, int w, int outputs)
{
    return ModelSpec("linear", Family::Conv2D, { 1, 0, h, outputs }, Shape::hwc(h, w, 3),
                     { FlattenLayer{}, DenseLayer{ outputs }, SoftmaxLayer{} });
}

std::vector<float> one_hot(int label, int n)
{
    std::vector<float> t(static_cast<std::size_t>(n), 0.0f);
    t[static_cast<std::size_t>(label)] = 1.0f;
    return t;
}

double left_mass_fraction(const Tensor& map)
{
    const int h = map.shape().height();
    const int w = map.shape().width();
    double left  = 0.0;
    double total = 0.0;
    for (int y = 0; y < h; ++y)
    {
        for (int x = 0; x < w; ++x)
        {
            total += map.at(y, x, 0);
            if (x < w / 2)
            {
                left += map.at(y, x, 0);
            }
        }
    }
    return left / total;
}

}    // namespace

TEST(Backward, DenseClosedForm)
{
    ModelSpec m = linear_model(1, 2, 3);    // 6 inputs, 3 classes
    ref::randomize_weights(m, 1);
    SplitMix64 rng(2);
    const Tensor x = ref::random_tensor(m.input_shape(), rng);
    const auto t   = one_hot(1, 3);

    const Gradients g = backward_pass(m, x, t);
    const auto p      = ref::softmax(ref::scores(m, ref::promote(m), ref::from_tensor(x)));
    const auto& w     = m.weights()[1].kernel;
    for (int j = 0; j < 3; ++j)
    {
        const double delta = p[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(j)];
        // Softmax + cross-entropy gradient at the logits is p - target.
        EXPECT_NEAR(g.params[1].bias[static_cast<std::size_t>(j)], delta, 1e-6);
        for (int k = 0; k < 6; ++k)
        {
            EXPECT_NEAR(g.params[1].kernel[static_cast<std::size_t>(k * 3 + j)], delta * x[static_cast<std::size_t>(k)], 1e-6);
        }
    }
    for (int k = 0; k < 6; ++k)
    {
        double expected = 0.0;
        for (int j = 0; j < 3; ++j)
        {
            expected += w[static_cast<std::size_t>(k * 3 + j)] * (p[static_cast<std::size_t>(j)] - t[static_cast<std::size_t>(j)]);
        }
        EXPECT_NEAR(g.input[static_cast<std::size_t>(k)], expected, 1e-6);
    }
    EXPECT_NEAR(g.loss, ref::cross_entropy(ref::scores(m, ref::promote(m), ref::from_tensor(x)), 1), 1e-6);
}

TEST(Backward, FiniteDifferencesOnSmallModels)
{
    for (std::uint64_t seed = 0; seed < 4; ++seed)
    {
        std::vector<ModelSpec> models = { build_depthwise_family({ 2, 0, 16, 2 }), build_conv2d_family({ 2, 2, 8, 2 }),
                                          build_resnet_single_block(2, 8, 2) };
        for (ModelSpec& m : models)
        {
            ASSERT_LE(count_parameters(m), 500);
            ref::randomize_weights(m, seed);
            SplitMix64 rng(seed + 10);
            const Tensor x = ref::random_tensor(m.input_shape(), rng, 0, 1);
            const auto r   = ref::check_gradients(m, x, static_cast<int>(seed % 2));
            EXPECT_LT(r.max_rel_error, 1e-3) << m.id() << " seed " << seed << ": " << r.worst;
            EXPECT_EQ(r.compared, static_cast<std::size_t>(count_parameters(m)) + m.input_shape().elements());
        }
    }
}

TEST(Backward, MaxPoolRoutesToFirstMaximum)
{
    ModelSpec m("pool", Family::Conv2D, { 1, 0, 2, 2 }, Shape::hwc(2, 2, 3),
                { MaxPoolLayer{}, FlattenLayer{}, DenseLayer{ 2 }, SoftmaxLayer{} });
    ref::randomize_weights(m, 3);
    const Tensor x(Shape::hwc(2, 2, 3), 0.5f);
    const Gradients g = backward_pass(m, x, one_hot(0, 2));
    for (int c = 0; c < 3; ++c)
    {
        EXPECT_NE(g.input.at(0, 0, c), 0.0f);
        EXPECT_EQ(g.input.at(0, 1, c), 0.0f);
        EXPECT_EQ(g.input.at(1, 0, c), 0.0f);
        EXPECT_EQ(g.input.at(1, 1, c), 0.0f);
    }
}

TEST(Backward, InnerSoftmaxIsUnsupported)
{
    ModelSpec m("inner", Family::Conv2D, { 1, 0, 1, 2 }, Shape::hwc(1, 1, 2),
                { FlattenLayer{}, SoftmaxLayer{}, DenseLayer{ 2 }, SoftmaxLayer{} });
    ref::randomize_weights(m, 1);
    EXPECT_THROW(backward_pass(m, Tensor(m.input_shape(), 1.0f), one_hot(0, 2)), CapabilityError);
}

TEST(Evaluate, UniformPredictionsGiveLnTwo)
{
    const Dataset ds = make_synthetic_brightness(10, 4, 0.5, 1);
    ModelSpec m      = linear_model(4, 4, 2);
    std::vector<LayerWeights> w(3);
    w[1] = { std::vector<float>(48 * 2, 0.0f), std::vector<float>(2, 0.0f) };
    m.set_weights(w);
    const Metrics metrics = evaluate(m, ds, Split::Validation);
    EXPECT_NEAR(metrics.loss, std::log(2.0), 1e-7);
    EXPECT_EQ(metrics.total, 10u);
    EXPECT_EQ(metrics.accuracy, static_cast<double>(metrics.correct) / static_cast<double>(metrics.total));
}

TEST(Evaluate, PerfectPredictionsAndPurity)
{
    // Class 0 ("bright") has every left-column byte >= 153, class 1 every one <= 102.
    const Dataset ds = make_synthetic_brightness(15, 2, 0.6, 4);
    ModelSpec m      = linear_model(2, 2, 2);
    std::vector<LayerWeights> w(3);
    w[1].kernel.assign(12 * 2, 0.0f);
    w[1].bias = { -300.0f, 0.0f };
    for (int y = 0; y < 2; ++y)
    {
        for (int c = 0; c < 3; ++c)
        {
            w[1].kernel[static_cast<std::size_t>(((y * 2 + 0) * 3 + c) * 2 + 0)] = 100.0f;
        }
    }
    m.set_weights(w);
    const ModelSpec before = m;
    const Metrics a        = evaluate(m, ds, Split::Train);
    const Metrics b        = evaluate(m, ds, Split::Train);
    EXPECT_EQ(a.accuracy, 1.0);
    EXPECT_LT(a.loss, 1e-12);
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_EQ(a.correct, b.correct);
    EXPECT_EQ(m, before);
}

TEST(Train, ZeroLearningRateKeepsWeights)
{
    const Dataset ds = make_synthetic_brightness(8, 8, 0.75, 2);
    ModelSpec m      = build_conv2d_family({ 1, 2, 8, 2 });
    initialize_weights(m, 1);
    TrainConfig cfg;
    cfg.epochs        = 3;
    cfg.learning_rate = 0.0;
    cfg.batch_size    = 4;
    const TrainResult r = train(m, ds, cfg);
    EXPECT_EQ(r.model.weights(), m.weights());
    EXPECT_EQ(r.history.size(), 3u);
}

TEST(Train, FrozenLayersStayFixed)
{
    const Dataset ds = make_synthetic_brightness(8, 8, 0.75, 2);
    ModelSpec m      = build_conv2d_family({ 2, 3, 8, 2 });
    initialize_weights(m, 5);

    SplitMix64 rng(1);
    const Gradients g = backward_pass(m, ds.items()[0].tensor, one_hot(ds.items()[0].label, 2));
    double layer0     = 0.0;
    for (float v : g.params[0].kernel)
    {
        layer0 += std::abs(v);
    }
    EXPECT_GT(layer0, 0.0);    // frozen layers still receive gradients

    TrainConfig cfg;
    cfg.epochs     = 2;
    cfg.batch_size = 4;
    cfg.freeze     = { 0 };
    TrainResult r  = train(m, ds, cfg);
    EXPECT_EQ(r.model.weights()[0], m.weights()[0]);
    EXPECT_NE(r.model.weights()[3], m.weights()[3]);
    EXPECT_NE(r.model.weights()[7], m.weights()[7]);

    cfg.freeze = { 0, 3, 7 };
    EXPECT_EQ(train(m, ds, cfg).model.weights(), m.weights());

    ModelSpec flagged = m;
    flagged.set_trainable(7, false);
    cfg.freeze = {};
    EXPECT_EQ(train(flagged, ds, cfg).model.weights()[7], m.weights()[7]);

    cfg.freeze = { 42 };
    EXPECT_THROW(train(m, ds, cfg), ParameterError);
}

TEST(Train, SameSeedSameHistory)
{
    const Dataset ds = make_synthetic_brightness(10, 8, 0.8, 3);
    ModelSpec m      = build_conv2d_family({ 1, 3, 8, 2 });
    initialize_weights(m, 2);
    TrainConfig cfg;
    cfg.epochs     = 3;
    cfg.batch_size = 5;
    cfg.seed       = 11;
    const TrainResult a = train(m, ds, cfg);
    const TrainResult b = train(m, ds, cfg);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e)
    {
        EXPECT_EQ(a.history[e].train.loss, b.history[e].train.loss);
        EXPECT_EQ(a.history[e].validation.loss, b.history[e].validation.loss);
    }
    EXPECT_EQ(a.model.weights(), b.model.weights());
}

TEST(Train, SmallLearningRateLossDoesNotIncrease)
{
    const Dataset ds = make_synthetic_brightness(20, 8, 0.8, 6);
    ModelSpec m      = build_conv2d_family({ 1, 4, 8, 2 });
    initialize_weights(m, 8);
    TrainConfig cfg;
    cfg.epochs        = 6;
    cfg.learning_rate = 1e-3;
    cfg.batch_size    = 8;
    const TrainResult r = train(m, ds, cfg);
    double previous     = evaluate(m, ds, Split::Train).loss;
    for (const EpochMetrics& e : r.history)
    {
        EXPECT_LE(e.train.loss, previous) << "epoch " << e.epoch;
        previous = e.train.loss;
    }
}

TEST(Train, SyntheticBrightnessConv2D)
{
    const Dataset ds = make_synthetic_brightness(100, 16, 0.8, 21);
    ModelSpec m      = build_conv2d_family({ 2, 34, 16, 2 });
    initialize_weights(m, 21);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed   = 21;
    const TrainResult r = train(m, ds, cfg);
    EXPECT_GE(r.history.back().validation.accuracy, 0.99);
}

TEST(Train, DivergenceReportsEpoch)
{
    const Dataset ds = make_synthetic_brightness(8, 8, 0.75, 2);
    ModelSpec m      = build_conv2d_family({ 1, 4, 8, 2 });
    initialize_weights(m, 1);
    TrainConfig cfg;
    cfg.epochs        = 50;
    cfg.learning_rate = 1e30;
    try
    {
        train(m, ds, cfg);
        FAIL() << "expected divergence";
    }
    catch (const TrainingError& e)
    {
        EXPECT_GE(e.epoch(), 1);
    }
}

TEST(Train, RejectsMismatchedData)
{
    const Dataset ds = make_synthetic_brightness(4, 8, 0.75, 2);
    ModelSpec m      = build_conv2d_family({ 1, 4, 16, 2 });
    initialize_weights(m, 1);
    EXPECT_THROW(train(m, ds, TrainConfig{}), ShapeError);
    TrainConfig bad;
    bad.batch_size = 0;
    EXPECT_THROW(bad.validate(), ParameterError);
    bad.batch_size   = 1;
    bad.weight_decay = -1.0;
    EXPECT_THROW(bad.validate(), ParameterError);
}

TEST(Saliency, DeadInputRegionIsZero)
{
    ModelSpec m = linear_model(4, 4, 2);
    ref::randomize_weights(m, 4);
    auto w = m.weights();
    for (int y = 0; y < 4; ++y)
    {
        for (int x = 2; x < 4; ++x)
        {
            for (int c = 0; c < 3; ++c)
            {
                for (int j = 0; j < 2; ++j)
                {
                    w[1].kernel[static_cast<std::size_t>(((y * 4 + x) * 3 + c) * 2 + j)] = 0.0f;
                }
            }
        }
    }
    m.set_weights(w);
    SplitMix64 rng(1);
    const SaliencyMap s = saliency(m, ref::random_tensor(m.input_shape(), rng, 0, 1));
    ASSERT_EQ(s.map.shape(), Shape::hwc(4, 4, 1));
    EXPECT_FALSE(s.zero_gradient);
    for (int y = 0; y < 4; ++y)
    {
        for (int x = 2; x < 4; ++x)
        {
            EXPECT_EQ(s.map.at(y, x, 0), 0.0f);
        }
    }
}

TEST(Saliency, ZeroGradientGivesZeroMap)
{
    ModelSpec m = linear_model(3, 3, 2);
    std::vector<LayerWeights> w(3);
    w[1] = { std::vector<float>(27 * 2, 0.0f), std::vector<float>(2, 0.0f) };
    m.set_weights(w);
    const SaliencyMap s = saliency(m, Tensor(m.input_shape(), 0.3f), 1);
    EXPECT_TRUE(s.zero_gradient);
    EXPECT_EQ(s.target_class, 1);
    for (float v : s.map.data())
    {
        EXPECT_EQ(v, 0.0f);
    }
    EXPECT_THROW(saliency(m, Tensor(m.input_shape()), 2), ParameterError);
}

TEST(Saliency, ShapeAndRangeOnEveryFamily)
{
    std::vector<ModelSpec> models = { build_conv2d_family({ 2, 4, 16, 2 }), build_depthwise_family({ 2, 0, 20, 3 }),
                                      build_resnet_single_block(3, 8, 2), build_mobilenet_like(0.25, 128, 2) };
    for (ModelSpec& m : models)
    {
        initialize_weights(m, 12);
        SplitMix64 rng(3);
        const Tensor x      = ref::random_tensor(m.input_shape(), rng, 0, 1);
        const SaliencyMap s = saliency(m, x);
        const int edge      = m.input_shape().height();
        ASSERT_EQ(s.map.shape(), Shape::hwc(edge, edge, 1)) << m.id();
        float lo = 1.0f;
        float hi = 0.0f;
        for (float v : s.map.data())
        {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        EXPECT_GE(lo, 0.0f);
        if (!s.zero_gradient)
        {
            EXPECT_EQ(hi, 1.0f) << m.id();
        }
        const Tensor img = saliency_image(s);
        for (std::size_t k = 0; k < img.size(); ++k)
        {
            EXPECT_FLOAT_EQ(img[k], 255.0f * (1.0f - s.map[k]));
        }
    }
}

TEST(Saliency, BrightnessClassifierLooksAtInformativeHalf)
{
    const Dataset ds = make_synthetic_brightness(100, 16, 0.8, 21);
    ModelSpec m      = build_conv2d_family({ 2, 34, 16, 2 });
    initialize_weights(m, 21);
    // Without an L2 penalty the right-half weights keep their random initialization.
    TrainConfig cfg;
    cfg.epochs       = 40;
    cfg.seed         = 21;
    cfg.weight_decay = 1.0;
    const TrainResult r     = train(m, ds, cfg);
    const ModelSpec& trained = r.model;
    EXPECT_EQ(r.history.back().validation.accuracy, 1.0);

    double mass = 0.0;
    const auto val = ds.split(Split::Validation);
    for (const LabeledImage* item : val)
    {
        mass += left_mass_fraction(saliency(trained, item->tensor).map);
    }
    EXPECT_GE(mass / static_cast<double>(val.size()), 0.70);
}

TEST(History, CsvColumns)
{
    const auto path = std::filesystem::temp_directory_path() / "edgecnn_history.csv";
    EpochMetrics e;
    e.epoch               = 1;
    e.train.accuracy      = 0.5;
    e.validation.accuracy = 0.75;
    write_history_csv({ e }, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "epoch,train_acc,train_loss,val_acc,val_loss");
    std::filesystem::remove(path);
}
