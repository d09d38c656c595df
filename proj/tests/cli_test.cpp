//
// Copyright 2026 The edgecnn Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "edgecnn/image.hpp"
#include "edgecnn/model_io.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

class CliTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("edgecnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override
    {
        fs::remove_all(dir_);
    }

    /// Runs the tool inside the scratch directory and returns its exit status.
    int run(const std::string& args) const
    {
        const std::string cmd = "cd '" + dir_.string() + "' && '" EDGECNN_CLI "' " + args + " >out.txt 2>err.txt";
        const int status      = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const fs::path& p) const
    {
        std::ifstream in(dir_ / p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_grid(const std::string& name, int blocks, int image) const
    {
        std::ofstream(dir_ / name) << json{ { "family", "conv2d" },
                                            { "blocks", { { "start", blocks }, { "end", blocks }, { "increment", 1 } } },
                                            { "filters", { { "start", 4 }, { "end", 8 }, { "increment", 4 } } },
                                            { "image", { { "start", image }, { "end", image }, { "increment", 1 } } },
                                            { "outputs", { { "start", 2 }, { "end", 2 }, { "increment", 1 } } } };
    }

    fs::path dir_;
};

}    // namespace

TEST_F(CliTest, UsageErrorsExitOne)
{
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("bench --runs 20"), 1);
    EXPECT_EQ(run("generate --grid builtin-table3 --family depthwise --out m"), 1);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(CliTest, MissingModelExitsTwoWithoutPartialReport)
{
    EXPECT_EQ(run("bench --models missing.cnnm --runs 20 --out r.csv"), 2);
    EXPECT_FALSE(fs::exists(dir_ / "r.csv"));
    EXPECT_FALSE(fs::exists(dir_ / "r.samples.csv"));
    EXPECT_NE(slurp("err.txt").find("missing.cnnm"), std::string::npos);

    fs::create_directories(dir_ / "models");
    std::ofstream(dir_ / "models" / "junk.cnnm") << "not a model";
    EXPECT_EQ(run("bench --models models --runs 20 --out r.csv"), 2);
    EXPECT_FALSE(fs::exists(dir_ / "r.csv"));
}

TEST_F(CliTest, NoFeasiblePointExitsThree)
{
    write_grid("deep.json", 6, 16);
    EXPECT_EQ(run("generate --grid deep.json --seed 1 --out m"), 3);
    EXPECT_TRUE(fs::exists(dir_ / "m" / "manifest.csv"));
}

TEST_F(CliTest, GenerateIsRepeatable)
{
    write_grid("g.json", 2, 16);
    ASSERT_EQ(run("generate --grid g.json --seed 9 --out a"), 0);
    ASSERT_EQ(run("generate --grid g.json --seed 9 --out b"), 0);
    EXPECT_EQ(slurp("a/manifest.csv"), slurp("b/manifest.csv"));
    EXPECT_EQ(slurp("a/conv2d_b2_f8_i16_o2.cnnm"), slurp("b/conv2d_b2_f8_i16_o2.cnnm"));

    const json manifest = json::parse(slurp("a/run.json"));
    EXPECT_EQ(manifest["command"], "generate");
    EXPECT_EQ(manifest["seed"], 9);
    EXPECT_EQ(manifest["flags"]["--profile"], "sipeed-like");
    EXPECT_EQ(manifest["outputs"]["models"].size(), 2u);
    EXPECT_FALSE(manifest["tool_version"].get<std::string>().empty());
}

TEST_F(CliTest, Pipeline)
{
    ASSERT_EQ(run("synth --per-class 40 --edge 16 --seed 2 --out data"), 0);
    write_grid("g.json", 2, 16);
    ASSERT_EQ(run("generate --grid g.json --seed 2 --out models"), 0);
    ASSERT_EQ(run("bench --models models --runs 20 --warmup 1 --host-tag ci --out r.csv"), 0);
    ASSERT_EQ(run("train --model models/conv2d_b2_f8_i16_o2.cnnm --data data --epochs 8 --seed 2 --out t.cnnm"), 0);
    ASSERT_EQ(run("eval --model t.cnnm --data data --seed 2 --out m.csv"), 0);
    ASSERT_EQ(run("saliency --model t.cnnm --image data/bright/00000.ppm --out s.png"), 0);
    ASSERT_EQ(run("report --in r.csv --group-by blocks --svg charts --out merged.csv"), 0);

    for (const char* m : { "data/run.json", "models/run.json", "r.csv.run.json", "t.cnnm.run.json", "m.csv.run.json",
                           "s.png.run.json", "merged.csv.run.json" })
    {
        EXPECT_NO_THROW(json::parse(slurp(m))) << m;
    }
    EXPECT_EQ(json::parse(slurp("r.csv.run.json"))["host_tag"], "ci");

    const std::string history = slurp("t.cnnm.history.csv");
    EXPECT_EQ(history.substr(0, history.find('\n')), "epoch,train_acc,train_loss,val_acc,val_loss");
    EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 9);
    EXPECT_NO_THROW(edgecnn::load_model(dir_ / "t.cnnm"));

    const std::string metrics = slurp("m.csv");
    EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "model,split,accuracy,loss,correct,total");

    const edgecnn::Tensor map = edgecnn::decode_image(dir_ / "s.png");
    EXPECT_EQ(map.shape().height(), 16);
    EXPECT_EQ(map.shape().width(), 16);
    const std::string merged = slurp("merged.csv");
    EXPECT_EQ(std::count(merged.begin(), merged.end(), '\n'), 3);
    EXPECT_TRUE(fs::exists(dir_ / "charts"));
}
