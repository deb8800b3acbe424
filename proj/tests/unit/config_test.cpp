#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "bahadur_lab/config.hpp"
#include "bahadur_lab/errors.hpp"

namespace bl = bahadur_lab;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[experiment]
seed = 7
replications = 100
sample_sizes = [10, 20]

[[tests]]
name = "lilliefors"

[[alternatives]]
family = "exponential"
)";

fs::path temp_file(const std::string& name, const std::string& body) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

std::string error_of(const std::string& text) {
  try {
    (void)bl::parse_config_text(text);
  } catch (const bl::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesMinimalFile) {
  const auto cfg = bl::parse_config_text(kMinimal);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.replications, 100u);
  EXPECT_EQ(cfg.sample_sizes, (std::vector<std::size_t>{10, 20}));
  ASSERT_EQ(cfg.tests.size(), 1u);
  EXPECT_EQ(cfg.tests[0], bl::TestKind::lilliefors());
  ASSERT_EQ(cfg.alternatives.size(), 1u);
  EXPECT_EQ(cfg.alternatives[0], bl::AlternativeSpec::exponential());
  EXPECT_EQ(cfg.bhep_beta, 1.0);
  EXPECT_TRUE(cfg.output_path.empty());
}

TEST(Config, ParsesFullFileAndRoundTrips) {
  const std::string text = R"(# full example
[experiment]
seed = 12345
replications = 50
sample_sizes = [
  10,  # small
  50,
]
bhep_beta = 0.5
output = "out \"x\".csv"

[[tests]]
name = "weighted_cvm"
psi = "table"
knots = [0.0, 0.5, 1.0]
values = [1.0, 2.0, 1.0]
scale = 0.5

[[tests]]
name = "bhep"

[[tests]]
name = "SW"

[[alternatives]]
family = "beta"
params = [3.0, 3.0]

[[alternatives]]
family = "laplace"
)";
  const auto cfg = bl::parse_config_text(text);
  EXPECT_EQ(cfg.output_path, "out \"x\".csv");
  ASSERT_EQ(cfg.tests.size(), 3u);
  EXPECT_EQ(cfg.tests[0].psi(), bl::WeightFunction::table({0.0, 0.5, 1.0}, {1.0, 2.0, 1.0}).scaled(0.5));
  EXPECT_EQ(cfg.tests[1].beta(), 0.5);
  EXPECT_EQ(cfg.alternatives[1], bl::AlternativeSpec::double_exponential());
  EXPECT_EQ(bl::parse_config_text(bl::emit_config(cfg)), cfg);
  EXPECT_EQ(bl::parse_config_text(bl::emit_config(bl::parse_config_text(kMinimal))),
            bl::parse_config_text(kMinimal));
}

TEST(Config, RejectsUnknownKeyWithLine) {
  std::string text = kMinimal;
  text.replace(text.find("replications"), 12, "replicatons");
  const auto msg = error_of(text);
  EXPECT_NE(msg.find("replicatons"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  EXPECT_THROW((void)bl::parse_config_text(text), bl::BadValue);
}

TEST(Config, RejectsBadValues) {
  std::string zero = kMinimal;
  zero.replace(zero.find("= 100"), 5, "= 0");
  EXPECT_THROW((void)bl::parse_config_text(zero), bl::BadValue);

  std::string tiny = kMinimal;
  tiny.replace(tiny.find("[10, 20]"), 8, "[2]");
  EXPECT_THROW((void)bl::parse_config_text(tiny), bl::BadValue);

  std::string fam = kMinimal;
  fam.replace(fam.find("\"exponential\""), 13, "\"gamma\"");
  EXPECT_THROW((void)bl::parse_config_text(fam), bl::BadValue);
}

TEST(Config, MissingAndMalformed) {
  std::string no_seed = kMinimal;
  no_seed.replace(no_seed.find("seed = 7"), 8, "");
  EXPECT_THROW((void)bl::parse_config_text(no_seed), bl::MissingKey);

  std::string broken = kMinimal;
  broken.replace(broken.find("seed = 7"), 8, "seed 7");
  EXPECT_THROW((void)bl::parse_config_text(broken), bl::ParseError);
  EXPECT_NE(error_of(broken).find("line 3"), std::string::npos);

  EXPECT_THROW((void)bl::parse_config_text("[experiment]\nseed = \"unterminated\n"),
               bl::ParseError);
  EXPECT_THROW((void)bl::parse_config(fs::temp_directory_path() / "no_such_config.toml"),
               bl::IoError);
}

TEST(Table, SortedAndFormatted) {
  const auto e = bl::AlternativeSpec::exponential();
  const auto u = bl::AlternativeSpec::uniform();
  std::vector<bl::PValueCell> cells = {
      {u, 10, bl::TestKind::lilliefors(), 0.25, 0.001, std::nullopt},
      {e, 20, bl::TestKind::shapiro_wilk(), 1.0 / 3.0, 1e-5, std::nullopt},
      {e, 10, bl::TestKind::weighted_cvm(), 0.125, 0.0, std::nullopt},
      {e, 10, bl::TestKind::bhep(), std::nan(""), std::nan(""), std::string("failed")},
  };
  const auto csv = bl::format_table(cells, 42, 1000);
  EXPECT_EQ(csv,
            "alternative,n,test,mean_pvalue,std_error,seed,N\n"
            "exponential(1),10,bhep,nan,nan,42,1000\n"
            "exponential(1),10,cvm,0.125,0,42,1000\n"
            "exponential(1),20,shapiro_wilk,0.333333333,1e-05,42,1000\n"
            "uniform(0,1),10,lilliefors,0.25,0.001,42,1000\n");
  EXPECT_THROW(bl::emit_table(cells, 1, 1, "/nonexistent_dir/x.csv"), bl::IoError);
}

TEST(DataFile, ReadsValuesAndReportsLines) {
  const auto good = temp_file("bl_good.txt", "# header\n1.5\n\n-2\n  3e-1  \n");
  EXPECT_EQ(bl::read_data_file(good), (std::vector<double>{1.5, -2.0, 0.3}));
  const auto bad = temp_file("bl_bad.txt", "1\n2\nabc\n");
  try {
    (void)bl::read_data_file(bad);
    FAIL() << "expected ParseError";
  } catch (const bl::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW((void)bl::read_data_file("/nonexistent_dir/x.txt"), bl::IoError);
  fs::remove(good);
  fs::remove(bad);
}
