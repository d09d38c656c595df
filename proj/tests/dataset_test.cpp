//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/dataset.hpp"
#include "edgecnn/errors.hpp"
#include "edgecnn/image.hpp"
#include "edgecnn/random.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace edgecnn;
namespace fs = std::filesystem;

namespace
{

Tensor byte_image(int h, int w, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    Tensor t(Shape::hwc(h, w, 3));
    for (float& v : t.data())
    {
        v = static_cast<float>(rng.below(256));
    }
    return t;
}

class DatasetTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        root_ = fs::temp_directory_path() /
                ("edgecnn_dataset_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
    }
    void TearDown() override
    {
        fs::remove_all(root_);
    }
    void populate(const fs::path& root, const std::vector<std::pair<std::string, int>>& classes, bool reverse = false)
    {
        for (const auto& [name, count] : classes)
        {
            fs::create_directories(root / name);
            for (int k = 0; k < count; ++k)
            {
                const int idx = reverse ? count - 1 - k : k;
                char file[32];
                std::snprintf(file, sizeof(file), "%03d.%s", idx, idx % 2 ? "png" : "ppm");
                write_image(root / name / file, byte_image(6 + idx % 3, 7, static_cast<std::uint64_t>(idx)));
            }
        }
    }
    fs::path root_;
};

}    // namespace

TEST_F(DatasetTest, TwoClassesThreeFilesEach)
{
    populate(root_, { { "grasped", 3 }, { "not_grasped", 3 } });
    Dataset ds = load_directory(root_, 8, 0.5, 1);
    EXPECT_EQ(ds.items().size(), 6u);
    EXPECT_EQ(ds.class_names(), (std::vector<std::string>{ "grasped", "not_grasped" }));
    EXPECT_EQ(ds.items()[0].path, "grasped/000.ppm");
    EXPECT_EQ(ds.items()[0].label, 0);
    EXPECT_EQ(ds.items()[5].label, 1);
    for (const auto& item : ds.items())
    {
        EXPECT_EQ(item.tensor.shape(), Shape::hwc(8, 8, 3));
        for (float v : item.tensor.data())
        {
            EXPECT_GE(v, 0.0f);
            EXPECT_LE(v, 1.0f);
        }
    }
    EXPECT_TRUE(ds.warnings.empty());
}

TEST_F(DatasetTest, EightyTwentySplitIsExactAndRepeatable)
{
    populate(root_, { { "a", 50 }, { "b", 50 } });
    Dataset first  = load_directory(root_, 4, 0.8, 7);
    Dataset second = load_directory(root_, 4, 0.8, 7);
    EXPECT_EQ(first.split(Split::Train).size(), 80u);
    EXPECT_EQ(first.split(Split::Validation).size(), 20u);
    for (std::size_t i = 0; i < first.items().size(); ++i)
    {
        EXPECT_EQ(first.items()[i].split, second.items()[i].split);
    }
    Dataset other_seed = load_directory(root_, 4, 0.8, 8);
    std::size_t differs = 0;
    for (std::size_t i = 0; i < first.items().size(); ++i)
    {
        differs += first.items()[i].split != other_seed.items()[i].split;
    }
    EXPECT_GT(differs, 0u);
}

TEST_F(DatasetTest, CreationOrderDoesNotMatter)
{
    populate(root_ / "x", { { "a", 9 }, { "b", 7 } });
    populate(root_ / "y", { { "b", 7 }, { "a", 9 } }, true);
    Dataset x = load_directory(root_ / "x", 5, 0.8, 3);
    Dataset y = load_directory(root_ / "y", 5, 0.8, 3);
    ASSERT_EQ(x.items().size(), y.items().size());
    for (std::size_t i = 0; i < x.items().size(); ++i)
    {
        EXPECT_EQ(x.items()[i].path, y.items()[i].path);
        EXPECT_EQ(x.items()[i].label, y.items()[i].label);
        EXPECT_EQ(x.items()[i].split, y.items()[i].split);
        EXPECT_EQ(x.items()[i].tensor, y.items()[i].tensor);
    }
}

TEST_F(DatasetTest, UndecodableFilesAreSkippedWithWarning)
{
    populate(root_, { { "a", 4 }, { "b", 5 } });
    std::ofstream(root_ / "a" / "broken.png") << "not a png";
    std::ofstream(root_ / "b" / "notes.txt") << "ignored";
    Dataset ds = load_directory(root_, 4, 0.8, 1);
    ASSERT_EQ(ds.warnings.size(), 1u);
    EXPECT_EQ(ds.warnings[0].rfind("a/broken.png", 0), 0u);
    std::vector<int> hist(2, 0);
    for (const auto& item : ds.items())
    {
        ++hist[static_cast<std::size_t>(item.label)];
    }
    EXPECT_EQ(hist, (std::vector<int>{ 4, 5 }));
}

TEST_F(DatasetTest, EmptyClassDirectoryIsAnError)
{
    populate(root_, { { "a", 2 } });
    fs::create_directories(root_ / "b");
    EXPECT_THROW(load_directory(root_, 4, 0.8, 1), DatasetError);
    EXPECT_THROW(load_directory(root_ / "missing", 4, 0.8, 1), IoError);
}

TEST_F(DatasetTest, SyntheticWriteAndReload)
{
    Dataset syn = make_synthetic_brightness(10, 8, 0.8, 5);
    write_dataset(syn, root_);
    Dataset back = load_directory(root_, 8, 0.8, 5);
    ASSERT_EQ(back.items().size(), syn.items().size());
    for (std::size_t i = 0; i < syn.items().size(); ++i)
    {
        EXPECT_EQ(back.items()[i].path, syn.items()[i].path);
        EXPECT_EQ(back.items()[i].split, syn.items()[i].split);
        for (std::size_t k = 0; k < syn.items()[i].tensor.size(); ++k)
        {
            EXPECT_NEAR(back.items()[i].tensor[k], syn.items()[i].tensor[k], 1e-6);
        }
    }
}

TEST(SyntheticBrightness, LeftHalfSeparatesClasses)
{
    Dataset ds = make_synthetic_brightness(20, 16, 0.8, 9);
    EXPECT_EQ(ds.items().size(), 40u);
    EXPECT_EQ(ds.split(Split::Train).size(), 32u);
    for (const auto& item : ds.items())
    {
        for (int y = 0; y < 16; ++y)
        {
            for (int x = 0; x < 8; ++x)
            {
                for (int c = 0; c < 3; ++c)
                {
                    const float v = item.tensor.at(y, x, c);
                    if (item.label == 0)
                    {
                        EXPECT_GE(v, 153.0f / 255.0f);
                    }
                    else
                    {
                        EXPECT_LE(v, 102.0f / 255.0f);
                    }
                }
            }
        }
    }
    const Dataset again = make_synthetic_brightness(20, 16, 0.8, 9);
    for (std::size_t i = 0; i < ds.items().size(); ++i)
    {
        EXPECT_EQ(ds.items()[i].tensor, again.items()[i].tensor);
    }
}

TEST(Splits, ParseNames)
{
    EXPECT_EQ(parse_split("train"), Split::Train);
    EXPECT_EQ(parse_split("validation"), Split::Validation);
    EXPECT_EQ(parse_split("val"), Split::Validation);
    EXPECT_THROW(parse_split("test"), ParameterError);
}
