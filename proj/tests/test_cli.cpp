#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using spdc::cli::run;

namespace {

int spdc_main(std::vector<std::string> args) {
  args.insert(args.begin(), "spdc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spdc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "sim.json") << R"({
      "duration_s": 0.5, "seed": 11,
      "source": {"model": "pair_poisson", "pair_rate_hz": 2e5, "bandwidth_hz": 13e6},
      "detectors": {"default": {"efficiency": 1.0, "dead_time_s": 0}}
    })";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateCorrelateFitPipeline) {
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("run")}), 0);
  for (const char* f : {"run/idler.tags", "run/s1.tags", "run/s2.tags", "run/manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "run/manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["seed"], 11);
  bool found = false;
  for (const auto& o : manifest["outputs"]) {
    if (o["path"] == "idler.tags") {
      found = true;
      EXPECT_EQ(o["sha256"].get<std::string>().size(), 64u);
    }
  }
  EXPECT_TRUE(found);
  // Partial files never survive a successful run.
  for (const auto& e : fs::directory_iterator(dir_ / "run")) {
    EXPECT_EQ(e.path().string().find(".partial"), std::string::npos);
  }

  ASSERT_EQ(spdc_main({"correlate", p("run/s1.tags"), p("run/idler.tags"), "--mode", "windowed", "--max-lag",
                       "300e-9", "-o", p("cross")}),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "cross.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "cross.manifest.json"));
  ASSERT_EQ(spdc_main({"fit", "--cross", p("cross.csv"), "-o", p("report.json")}), 0);
  const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_TRUE(report.contains("cross"));
}

TEST_F(CliTest, RerunIsByteIdentical) {
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("a")}), 0);
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("b")}), 0);
  for (const char* f : {"idler.tags", "s1.tags", "s2.tags", "manifest.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("c"), "--seed", "12"}), 0);
  EXPECT_NE(slurp(dir_ / "a/idler.tags"), slurp(dir_ / "c/idler.tags"));
}

TEST_F(CliTest, ConvertRoundTrip) {
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("run")}), 0);
  ASSERT_EQ(spdc_main({"convert", p("run/s2.tags"), p("s2.csv")}), 0);
  ASSERT_EQ(spdc_main({"convert", p("s2.csv"), p("s2.tags")}), 0);
  EXPECT_EQ(slurp(dir_ / "run/s2.tags"), slurp(dir_ / "s2.tags"));
}

TEST_F(CliTest, HeraldAndDesignRun) {
  ASSERT_EQ(spdc_main({"simulate", "-c", p("sim.json"), "-o", p("run")}), 0);
  ASSERT_EQ(spdc_main({"herald", "--idler", p("run/idler.tags"), "--s1", p("run/s1.tags"), "--s2",
                       p("run/s2.tags"), "--surface", "-o", p("herald")}),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "herald.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "herald.surface.csv"));
  const std::string spec = (fs::path(SPDC_TEST_DATA_DIR) / "resonator_1p9mm.json").string();
  ASSERT_EQ(spdc_main({"design", "--spec", spec, "--sweep", "gap", "-o", p("gap")}), 0);
  const std::string csv = slurp(dir_ / "gap.csv");
  EXPECT_EQ(csv.rfind("d_m,bandwidth_hz", 0), 0u) << csv.substr(0, 40);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(spdc_main({}), 1);
  EXPECT_EQ(spdc_main({"simulate", "--bogus"}), 1);
  std::ofstream(dir_ / "bad.json") << R"({"duration_s": 1, "source": {"pair_rate_hz": 1}})";
  EXPECT_EQ(spdc_main({"simulate", "-c", p("bad.json"), "-o", p("x")}), 2);
  std::ofstream(dir_ / "broken.json") << "{";
  EXPECT_EQ(spdc_main({"simulate", "-c", p("broken.json"), "-o", p("x")}), 3);
  std::ofstream(dir_ / "junk.tags") << "not a tag file at all, clearly";
  EXPECT_EQ(spdc_main({"correlate", p("junk.tags"), "-o", p("y")}), 3);
  EXPECT_FALSE(fs::exists(dir_ / "y.csv"));
  // A flat curve has no peak to fit.
  std::ofstream flat(dir_ / "flat.csv");
  flat << "# bin_width_s=3e-09\ntau_s,g2,stderr,counts\n";
  for (int k = -20; k <= 20; ++k) flat << k * 3e-9 << ",1,0.01,100\n";
  flat.close();
  EXPECT_EQ(spdc_main({"fit", "--cross", p("flat.csv"), "--fix-baseline", "1", "-o", p("f.json")}), 4);
  EXPECT_EQ(spdc_main({"design", "--spec", p("sim.json"), "-o", p("z")}), 2);
}
