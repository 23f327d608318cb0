//
// Copyright 2026 The forgeset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "forgeset/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "forgeset/metrics.hpp"
#include "test_util.hpp"

namespace forgeset::harness {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSmall = R"({
  "seed": 3,
  "dataset": {"generator": "blobs", "n_per_class": 20, "test_per_class": 20},
  "model": {"epochs": 60, "lr": 0.5},
  "forget": {"m": 4},
  "selection": {"outer_steps": 5, "random_masks": 3},
  "unlearn": {"methods": ["Retrain", "FT"], "seeds": 2},
  "mixture": {"grid": [0, 1], "seeds": 2}
})";

std::string Slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> Rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(Slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void RunIn(std::string_view verb, const std::string& json, const fs::path& out) {
  RunVerb(verb, ParseConfig(json), RunOptions{out, std::nullopt, false});
}

TEST(Config, Defaults) {
  const ExperimentConfig c = ParseConfig("{}");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.dataset.generator, "blobs");
  EXPECT_EQ(c.selection.gamma, 1e-4);
  EXPECT_EQ(c.selection.alpha, 1e-3);
  EXPECT_EQ(c.selection.beta, 0.01);
  EXPECT_EQ(c.selection.inner_steps, 10u);
  EXPECT_EQ(c.selection.outer_steps, 20u);
  ASSERT_EQ(c.methods.size(), 5u);
  EXPECT_EQ(c.methods[0].method, Method::kRetrain);
  EXPECT_EQ(ForgetUnits(c, 400), 40u);
  const std::string echo = ResolvedConfigJson(c);
  EXPECT_EQ(ResolvedConfigJson(ParseConfig(echo)), echo);
}

TEST(Config, RetrainIsAlwaysFirst) {
  const auto c = ParseConfig(R"({"unlearn": {"methods": ["GA", {"method": "FT", "lr": 0.2}]}})");
  ASSERT_EQ(c.methods.size(), 3u);
  EXPECT_EQ(c.methods[0].method, Method::kRetrain);
  EXPECT_EQ(c.methods[2].lr, 0.2);
  const auto d = ParseConfig(R"({"unlearn": {"methods": ["FT", "Retrain"]}})");
  ASSERT_EQ(d.methods.size(), 2u);
  EXPECT_EQ(d.methods[0].method, Method::kRetrain);
}

TEST(Config, Errors) {
  for (const char* bad : {
           R"({"sed": 1})",
           R"({"seed": "x"})",
           R"({"forget": {"ratio": 0}})",
           R"({"forget": {"ratio": 1.5}})",
           R"({"dataset": {"generator": "moons"}})",
           R"({"dataset": {"generator": "csv"}})",
           R"({"unlearn": {"methods": ["scrub"]}})",
           R"({"selection": {"alpha": 0}})",
           R"({"model": {"lr": -1}})",
           R"({"model": {}, "models": [{}]})",
           "{",
       }) {
    EXPECT_FS_ERROR(ParseConfig(bad), ErrorCode::kConfig);
  }
  EXPECT_FS_ERROR(LoadConfig("/nonexistent/cfg.json"), ErrorCode::kFile);
  ExperimentConfig c = ParseConfig(R"({"forget": {"m": 50}})");
  EXPECT_FS_ERROR(ForgetUnits(c, 10), ErrorCode::kConfig);
}

TEST(Digests, KnownValues) {
  EXPECT_EQ(Sha1Hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(GitBlobId(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Mixture, EndpointsAndSize) {
  SelectionResult worst;
  worst.weights.w = {0.9, 0.1, 0.8, 0.0, 0.7, 0.2};
  worst.mask = ForgetMask{{0, 2, 4}};
  const std::vector<std::size_t> pool = {5, 1, 3};
  EXPECT_EQ(MixtureMask(worst, 1.0, pool), worst.mask);
  EXPECT_EQ(MixtureMask(worst, 0.0, pool).indices, (std::vector<std::size_t>{1, 3, 5}));
  const auto half = MixtureMask(worst, 0.34, pool);
  EXPECT_EQ(half.indices, (std::vector<std::size_t>{0, 1, 5}));
}

TEST(Run, MissingOutputDirectory) {
  EXPECT_FS_ERROR(RunIn("gen", kSmall, "/nonexistent/out"), ErrorCode::kFile);
  testing::TempDir dir("verb");
  EXPECT_FS_ERROR(RunIn("dance", kSmall, dir.path()), ErrorCode::kConfig);
}

TEST(Run, GenIsReproducible) {
  testing::TempDir a("gen-a"), b("gen-b");
  RunIn("gen", kSmall, a.path());
  RunIn("gen", kSmall, b.path());
  EXPECT_EQ(Slurp(a / "train.csv"), Slurp(b / "train.csv"));
  EXPECT_EQ(Slurp(a / "test.csv"), Slurp(b / "test.csv"));
  const Dataset d = LoadCsv(a / "train.csv");
  EXPECT_EQ(d.size(), 40u);
}

TEST(Run, SeedOverrideChangesData) {
  testing::TempDir a("seed-a"), b("seed-b");
  RunIn("gen", kSmall, a.path());
  RunVerb("gen", ParseConfig(kSmall), RunOptions{b.path(), 99, false});
  EXPECT_NE(Slurp(a / "train.csv"), Slurp(b / "train.csv"));
}

TEST(Run, BiasedDataCarriesGroups) {
  testing::TempDir dir("biased");
  RunIn("gen", R"({"dataset": {"generator": "biased", "n": 1000, "correlation": 0.9}})",
      dir.path());
  const auto header = Rows(dir / "train.csv").front();
  EXPECT_EQ(header.back(), "group");
  const Dataset d = LoadCsv(dir / "train.csv");
  EXPECT_NEAR(AlignedFraction(d), 0.9, 3 * std::sqrt(0.09 / 1000));
}

TEST(Run, SelectWritesMasks) {
  testing::TempDir dir("select");
  RunIn("select", kSmall, dir.path());
  std::set<std::vector<std::size_t>> distinct;
  for (int k = 0; k < 3; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "mask_random_%02d.txt", k);
    const ForgetMask m = LoadMask(dir / name);
    EXPECT_EQ(m.size(), 4u);
    distinct.insert(m.indices);
  }
  EXPECT_EQ(distinct.size(), 3u);
  EXPECT_EQ(LoadMask(dir / "mask_worst.txt").size(), 4u);
  EXPECT_EQ(LoadMask(dir / "mask_easiest.txt").size(), 4u);
  const auto summary = Rows(dir / "selection_summary.csv");
  EXPECT_EQ(summary[0],
            (std::vector<std::string>{"set_kind", "size", "objective_first", "objective_last",
                                      "aligned_pct"}));
  EXPECT_TRUE(fs::exists(dir / "class_entropy.csv"));
  EXPECT_TRUE(fs::exists(dir / "selection_worst.json"));
}

TEST(Run, RetrainOnlyHasZeroGaps) {
  testing::TempDir dir("retrain");
  const std::string cfg = R"({
    "seed": 3,
    "dataset": {"n_per_class": 20, "test_per_class": 20},
    "model": {"epochs": 60},
    "forget": {"m": 4},
    "selection": {"outer_steps": 3, "random_masks": 2},
    "unlearn": {"methods": ["Retrain"], "seeds": 1}
  })";
  RunIn("unlearn-eval", cfg, dir.path());
  const auto rows = Rows(dir / "eval_summary.csv");
  ASSERT_EQ(rows.size(), 4u);
  const auto& h = rows[0];
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < h.size(); ++c) {
      if (h[c].find("gap") != std::string::npos || h[c].find("std") != std::string::npos) {
        EXPECT_EQ(rows[r][c], "0.00") << h[c];
      }
    }
  }
}

TEST(Run, SummaryMatchesRawRows) {
  testing::TempDir dir("eval");
  RunIn("unlearn-eval", kSmall, dir.path());
  const auto raw = Rows(dir / "eval_raw.csv");
  const auto summary = Rows(dir / "eval_summary.csv");
  ASSERT_EQ(raw[0], (std::vector<std::string>{"method", "set_kind", "seed", "status", "ua",
                                               "mia", "ra", "ta"}));
  std::map<std::pair<std::string, std::string>, Vector> ua;
  for (std::size_t r = 1; r < raw.size(); ++r) {
    EXPECT_EQ(raw[r][3], "ok");
    ua[{raw[r][0], raw[r][1]}].push_back(std::stod(raw[r][4]));
  }
  EXPECT_EQ(ua.size(), 6u);
  for (std::size_t r = 1; r < summary.size(); ++r) {
    const Vector& v = ua.at({summary[r][0], summary[r][1]});
    EXPECT_EQ(v.size(), 2u);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", RoundReported(Mean(v)) + 0.0);
    EXPECT_EQ(summary[r][2], buf);
  }
  EXPECT_TRUE(fs::exists(dir / "eval_table.md"));
  const std::string record = Slurp(dir / "run_record.json");
  EXPECT_NE(record.find("config_sha1"), std::string::npos);
  EXPECT_NE(record.find(GitBlobId(Slurp(dir / "train.csv"))), std::string::npos);
}

TEST(Run, TransferDiagonalMatchesEval) {
  testing::TempDir dir("transfer");
  const std::string cfg = R"({
    "seed": 3,
    "dataset": {"n_per_class": 20, "test_per_class": 20},
    "models": [{"name": "linear", "epochs": 60}, {"name": "mlp", "hidden": [4], "epochs": 60}],
    "forget": {"m": 4},
    "selection": {"outer_steps": 3, "random_masks": 2},
    "unlearn": {"methods": ["Retrain"], "seeds": 1}
  })";
  RunIn("transfer", cfg, dir.path());
  RunIn("unlearn-eval", cfg, dir.path());
  const auto t = Rows(dir / "transfer.csv");
  ASSERT_EQ(t.size(), 1u + 3 * 2);
  EXPECT_EQ(t[1][0], "linear");
  EXPECT_EQ(t[1][1], "linear");
  std::string eval_ua;
  for (const auto& r : Rows(dir / "eval_raw.csv")) {
    if (r[1] == "worst" && r[2] == "0") eval_ua = r[4];
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", std::stod(eval_ua));
  EXPECT_EQ(t[1][2], buf);
  EXPECT_EQ(t[5][0], "random");
  EXPECT_FS_ERROR(RunIn("transfer", kSmall, dir.path()), ErrorCode::kConfig);
}

TEST(Run, OracleGuard) {
  testing::TempDir dir("oracle");
  const std::string cfg = R"({"dataset": {"n_per_class": 20}, "model": {"epochs": 5},
                              "forget": {"m": 8}, "selection": {"outer_steps": 1}})";
  EXPECT_FS_ERROR(RunIn("oracle", cfg, dir.path()), ErrorCode::kTooLarge);
}

TEST(Run, ReportIsByteIdentical) {
  testing::TempDir a("report-a"), b("report-b");
  RunIn("report", kSmall, a.path());
  RunIn("report", kSmall, b.path());
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("timings_", 0) == 0) continue;
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / name)) << name;
    ++compared;
  }
  EXPECT_GT(compared, 10u);
  EXPECT_TRUE(fs::exists(a / "report.md"));
  EXPECT_TRUE(fs::exists(a / "coreset.csv"));
  EXPECT_TRUE(fs::exists(a / "mixture.csv"));
}

}  // namespace
}  // namespace forgeset::harness
