//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/errors.hpp"
#include "edgecnn/generator.hpp"
#include "edgecnn/model_io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace edgecnn;

namespace
{

ModelSpec canonical_depthwise()
{
    ModelSpec m = build_depthwise_family({ 5, 0, 128, 2 });
    initialize_weights(m, 7);
    return m;
}

std::uint32_t header_length(const std::vector<std::uint8_t>& bytes)
{
    return static_cast<std::uint32_t>(bytes[6]) | static_cast<std::uint32_t>(bytes[7]) << 8 |
           static_cast<std::uint32_t>(bytes[8]) << 16 | static_cast<std::uint32_t>(bytes[9]) << 24;
}

}    // namespace

TEST(ModelIo, RoundTripIsBitIdentical)
{
    std::vector<ModelSpec> models = { canonical_depthwise(), build_conv2d_family({ 2, 34, 16, 2 }),
                                      build_resnet_single_block(8, 16, 3), build_mobilenet_like(0.25, 128, 2) };
    for (ModelSpec& m : models)
    {
        if (!m.has_weights())
        {
            initialize_weights(m, 99);
        }
        const auto bytes = serialize(m);
        ModelSpec back  = deserialize(bytes);
        EXPECT_EQ(back, m) << m.id();
        for (std::size_t l = 0; l < m.weights().size(); ++l)
        {
            const auto& a = m.weights()[l].kernel;
            const auto& b = back.weights()[l].kernel;
            ASSERT_EQ(a.size(), b.size());
            EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
        }
        EXPECT_EQ(serialize(back), bytes);
    }
}

TEST(ModelIo, CanonicalDepthwiseFileSize)
{
    ModelSpec m      = canonical_depthwise();
    const auto bytes = serialize(m);
    EXPECT_EQ(bytes.size(), kModelPrefixSize + header_length(bytes) + 4u * 248u);
    EXPECT_EQ(static_cast<std::int64_t>(bytes.size()), estimate_size(m).file_bytes_f32);
    EXPECT_EQ(estimate_size(m).params, 248);
    EXPECT_GE(estimate_size(m).file_bytes_u8, 248);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "CNNM");
}

TEST(ModelIo, EveryTruncationIsAFormatError)
{
    const auto bytes = serialize(canonical_depthwise());
    for (std::size_t n = 0; n < bytes.size(); ++n)
    {
        EXPECT_THROW(deserialize(std::span(bytes.data(), n)), FormatError) << n;
    }
}

TEST(ModelIo, TrailingBytesRejected)
{
    auto bytes = serialize(canonical_depthwise());
    bytes.push_back(0);
    try
    {
        deserialize(bytes);
        FAIL();
    }
    catch (const FormatError& e)
    {
        EXPECT_EQ(e.offset(), bytes.size() - 1);
    }
}

TEST(ModelIo, BadMagicReportsOffsetZero)
{
    auto bytes = serialize(canonical_depthwise());
    bytes[0]   = 'X';
    try
    {
        deserialize(bytes);
        FAIL();
    }
    catch (const FormatError& e)
    {
        EXPECT_EQ(e.offset(), 0u);
    }
}

TEST(ModelIo, EverySingleByteHeaderFlipIsAFormatError)
{
    const auto bytes       = serialize(canonical_depthwise());
    const std::size_t head = kModelPrefixSize + header_length(bytes);
    const std::uint8_t masks[] = { 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0xFF };
    std::size_t checked = 0;
    for (std::size_t pos = 0; pos < head; ++pos)
    {
        for (std::uint8_t mask : masks)
        {
            auto corrupted = bytes;
            corrupted[pos] ^= mask;
            EXPECT_THROW(deserialize(corrupted), FormatError) << "byte " << pos << " mask " << int(mask);
            ++checked;
        }
    }
    EXPECT_EQ(checked, head * 9);
}

TEST(ModelIo, WeightFlipsDecodeWithoutCrashing)
{
    const auto bytes       = serialize(canonical_depthwise());
    const std::size_t head = kModelPrefixSize + header_length(bytes);
    for (std::size_t pos = head; pos < bytes.size(); pos += 7)
    {
        auto corrupted = bytes;
        corrupted[pos] ^= 0x5A;
        EXPECT_NO_THROW(deserialize(corrupted));
    }
}

TEST(ModelIo, NonFamilyModelsAreNotStored)
{
    ModelSpec m("custom", Family::Conv2D, { 1, 4, 8, 2 }, Shape::hwc(8, 8, 3),
                { Conv2DLayer{ 4 }, MaxPoolLayer{}, FlattenLayer{}, DenseLayer{ 2 }, SoftmaxLayer{} });
    initialize_weights(m, 1);
    EXPECT_THROW(serialize(m), ParameterError);
    EXPECT_THROW(serialize(build_depthwise_family({ 1, 0, 8, 2 })), ParameterError);
}

TEST(ModelIo, TrainableFlagsSurvive)
{
    ModelSpec m = build_conv2d_family({ 2, 4, 16, 2 });
    initialize_weights(m, 3);
    m.set_trainable(0, false);
    ModelSpec back = deserialize(serialize(m));
    EXPECT_FALSE(is_trainable(back.layers()[0]));
    EXPECT_EQ(count_trainable_parameters(back), count_parameters(m) - 28 * 4);
}

TEST(ModelIo, FileRoundTripAndMissingFile)
{
    const auto dir = std::filesystem::temp_directory_path() / "edgecnn_model_io_test";
    std::filesystem::create_directories(dir);
    ModelSpec m = canonical_depthwise();
    save_model(m, dir / "m.cnnm");
    EXPECT_EQ(load_model(dir / "m.cnnm"), m);
    EXPECT_EQ(static_cast<std::int64_t>(std::filesystem::file_size(dir / "m.cnnm")), estimate_size(m).file_bytes_f32);
    EXPECT_THROW(load_model(dir / "missing.cnnm"), IoError);
    std::filesystem::remove_all(dir);
}
