// Copyright 2026 The tlfgrape Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tlfgrape/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace tlfgrape {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("tlfgrape_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        write("quick.toml",
              "e2 = 0.1\nlambda = 0.1\ntemperature = 0.2\nkappa = 0.05\ntg = 2.0\nseed = 3\n"
              "restarts = 2\nmax_iterations = 6\ntg_grid = [1.5, 2.0]\ngamma_grid = [0.05, 0.3, 1.0]\n"
              "temperature_grid = [0.2]\n");
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "tlfgrape_cli");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

TEST_F(CliTest, HelpAndArgumentErrors) {
    EXPECT_EQ(run({"--help"}), 0);
    EXPECT_NE(out_.str().find("sweep-gamma"), std::string::npos);
    EXPECT_EQ(run({}), 1);
    EXPECT_EQ(run({"--bogus", "rabi"}), 1);
    EXPECT_EQ(run({"frobnicate"}), 1);
    EXPECT_EQ(run({"--threads", "0", "rabi"}), 1);
    EXPECT_EQ(run({"--gradient-mode", "second_order", "rabi"}), 1);
}

TEST_F(CliTest, InvalidConfigurationExitsOne) {
    write("unknown.toml", "kapa = 0.05\n");
    EXPECT_EQ(run({"--config", path("unknown.toml").string(), "rabi"}), 1);
    EXPECT_NE(err_.str().find("unknown config key"), std::string::npos);
    write("negative.toml", "kappa = -0.05\n");
    EXPECT_EQ(run({"--config", path("negative.toml").string(), "rabi"}), 1);
    EXPECT_EQ(run({"--config", path("missing.toml").string(), "rabi"}), 1);
    EXPECT_EQ(run({"--config", path("quick.toml").string(), "--seed", "-1", "rabi"}), 1);
    EXPECT_EQ(run({"--config", path("quick.toml").string(), "--out", dir_.string(), "optimize", "--init-pulse",
                   path("nope.csv").string()}),
              1);
}

TEST_F(CliTest, OptimizeWritesResultPulseAndTrajectory) {
    const std::string out = (dir_ / "opt").string();
    ASSERT_EQ(run({"--config", path("quick.toml").string(), "--out", out, "optimize", "--tg", "1.5"}), 0)
        << err_.str();
    const auto j = nlohmann::json::parse(read("opt/optimize.json"));
    EXPECT_NEAR(j.at("t_g").get<double>(), 1.5, 1e-12);
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 3u);
    EXPECT_NEAR(j.at("gate_error").get<double>(), 1.0 - j.at("fidelity").get<double>(), 1e-15);
    EXPECT_EQ(read("opt/pulse.csv").rfind("slice_index,t_mid,E1\n", 0), 0u);
    EXPECT_EQ(read("opt/trajectory.csv").rfind("t,bloch_x,bloch_y,bloch_z,entropy_nats,E1\n", 0), 0u);

    // the written pulse is accepted as a starting guess
    ASSERT_EQ(run({"--config", path("quick.toml").string(), "--out", (dir_ / "opt2").string(), "optimize", "--tg",
                   "1.5", "--init-pulse", (dir_ / "opt/pulse.csv").string()}),
              0)
        << err_.str();
    const auto j2 = nlohmann::json::parse(read("opt2/optimize.json"));
    EXPECT_LE(j2.at("gate_error").get<double>(), j.at("gate_error").get<double>());
}

TEST_F(CliTest, GlobalFlagsOverrideConfig) {
    const std::string out = (dir_ / "flags").string();
    ASSERT_EQ(run({"--config", path("quick.toml").string(), "--out", out, "--seed", "9", "--gradient-mode",
                   "first_order", "--penalty", "--lamb-shift", "optimize"}),
              0)
        << err_.str();
    const auto j = nlohmann::json::parse(read("flags/optimize.json"));
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 9u);
    EXPECT_EQ(j.at("gradient_mode"), "first_order");
    EXPECT_TRUE(j.at("penalty").at("enabled").get<bool>());
    EXPECT_TRUE(j.at("params").at("lamb_shift").get<bool>());

    write("pen.toml", "penalty = true\nmax_iterations = 2\nrestarts = 1\n");
    ASSERT_EQ(run({"--config", path("pen.toml").string(), "--out", out, "--no-penalty", "optimize"}), 0);
    EXPECT_FALSE(nlohmann::json::parse(read("flags/optimize.json")).at("penalty").at("enabled").get<bool>());
}

TEST_F(CliTest, RabiBaseline) {
    ASSERT_EQ(run({"--config", path("quick.toml").string(), "--out", (dir_ / "rabi").string(), "rabi"}), 0);
    const auto j = nlohmann::json::parse(read("rabi/rabi.json"));
    EXPECT_GT(j.at("gate_error").get<double>(), 0.0);
    EXPECT_LT(j.at("gate_error").get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(path("rabi/rabi_pulse.csv")));
}

TEST_F(CliTest, SweepsAreByteReproducible) {
    const std::string c = path("quick.toml").string();
    ASSERT_EQ(run({"--config", c, "--out", (dir_ / "a").string(), "sweep-tg"}), 0) << err_.str();
    ASSERT_EQ(run({"--config", c, "--out", (dir_ / "b").string(), "sweep-tg"}), 0);
    EXPECT_EQ(read("a/sweep_tg.csv"), read("b/sweep_tg.csv"));

    ASSERT_EQ(run({"--config", c, "--out", (dir_ / "a").string(), "sweep-gamma"}), 0) << err_.str();
    ASSERT_EQ(run({"--config", c, "--out", (dir_ / "b").string(), "sweep-gamma"}), 0);
    EXPECT_EQ(read("a/sweep_gamma.csv"), read("b/sweep_gamma.csv"));
    const auto j = nlohmann::json::parse(read("a/sweep_gamma.json"));
    for (const char* key : {"spec", "build", "points", "fits", "gamma_max"}) EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j.at("points").size(), 3u);

    ASSERT_EQ(run({"--config", c, "--out", (dir_ / "a").string(), "sweep-temp"}), 0) << err_.str();
    EXPECT_EQ(nlohmann::json::parse(read("a/sweep_temp.json")).at("temperatures").size(), 1u);
}

TEST_F(CliTest, CheckReportsEveryInvariant) {
    const int code = run({"check"});
    const std::string text = out_.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
    // the thermalization ratio sits at 2 pi rather than 1, so the suite fails
    EXPECT_NE(text.find("FAIL tlf_thermalization_rate_over_gamma"), std::string::npos);
    EXPECT_EQ(code, 2);
}

}  // namespace
}  // namespace tlfgrape
