// Copyright 2026 The planret Authors.
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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "planret/binary_io.hpp"
#include "planret/cli/commands.hpp"
#include "planret/cli/config.hpp"
#include "planret/error.hpp"
#include "planret/index/plan_index.hpp"

namespace planret::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "planret");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Small encoder so the end-to-end flow stays fast.
const std::vector<std::string> kTiny{"--set", "model.encoder.widths=[4,8]", "--set",
                                     "model.encoder.groups=2", "--set",
                                     "model.encoder.embedding_dim=8"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "planret_cli_test";
    fs::remove_all(root_);
    fs::create_directories(root_);
    const auto g = run({"gen", "--per-class", "4", "--seed", "3", "--out", p("data")});
    ASSERT_EQ(g.code, 0) << g.err;
    const auto t = run(with({"train", "--model", "siamese_triplet", "--data", p("data"), "--epochs",
                             "1", "--out", p("run")},
                            kTiny));
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static std::string p(const std::string& rel) { return (root_ / rel).string(); }
  static fs::path root_;
};
fs::path CliFlow::root_;

TEST(ConfigTest, DefaultsAndEcho) {
  const RunConfig c = parse_config("", {});
  EXPECT_EQ(c.kind, models::ModelKind::kMultitask);
  EXPECT_EQ(c.encoder.embedding_dim, 32);
  EXPECT_EQ(c.encoder.in_channels, 2);
  EXPECT_EQ(c.eval.max_k, 5);
  EXPECT_EQ(c.eval.weighting.base, 0.5);
  // The echo parses back to the same document.
  EXPECT_EQ(to_json(parse_config(to_json(c), {})), to_json(c));
}

TEST(ConfigTest, FileAndOverrides) {
  const std::string text = R"({"seed": 9, "model": {"kind": "simsiam"}, "loss": {"gamma": 0.5},
                                "input": {"mask_encoding": "one_hot"}})";
  const RunConfig c = parse_config(text, {{"train.epochs", "3"}, {"query.filter", R"(["site=prostate"])"},
                                          {"model.kind", "info_vae"}});
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.kind, models::ModelKind::kInfoVae);
  EXPECT_EQ(c.loss.gamma, 0.5);
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_EQ(c.encoder.in_channels, 5);
  ASSERT_EQ(c.query.filter.size(), 1u);
  const RunConfig echo = parse_config(to_json(c), {});
  EXPECT_EQ(to_json(echo), to_json(c));
}

TEST(ConfigTest, Rejections) {
  EXPECT_THROW(parse_config(R"({"sed": 1})", {}), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epochs": "many"}})", {}), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epochs": 0}})", {}), ConfigError);
  EXPECT_THROW(parse_config("{not json", {}), ConfigError);
  EXPECT_THROW(parse_config("", {{"model.depth", "3"}}), ConfigError);
  EXPECT_THROW(parse_config("", {{"model", "3"}}), ConfigError);
  EXPECT_THROW(parse_config("", {{"index.split", "everything"}}), ConfigError);
  EXPECT_THROW(parse_config("", {{"seed", "-1"}}), ConfigError);
  EXPECT_THROW(parse_config("", {{"data.split_fractions", "[0.5, 0.5, 0.5]"}}), ConfigError);
  EXPECT_THROW(parse_override("novalue"), ConfigError);
  EXPECT_THROW(resolve_config("/nonexistent/planret.json", {}), ConfigError);
}

TEST(CliExitCodes, UsageAndConfig) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"train", "--model", "bogus"}).code, 2);
  EXPECT_EQ(run({"gen", "--per-class", "1", "--out", "/tmp/planret_unused"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto missing = run({"train", "--data", "/nonexistent/planret_data", "--out", "/tmp/planret_unused"});
  EXPECT_EQ(missing.code, 5) << missing.err;
}

TEST_F(CliFlow, GenIsReproducible) {
  const auto a = run({"gen", "--per-class", "4", "--seed", "3", "--out", p("data_again")});
  ASSERT_EQ(a.code, 0);
  EXPECT_NE(a.out.find("cases 128 classes 32"), std::string::npos);
  EXPECT_EQ(read_file(p("data_again/manifest.tsv")), read_file(p("data/manifest.tsv")));
  EXPECT_EQ(read_file(p("data_again/case_0007.ct.vol")), read_file(p("data/case_0007.ct.vol")));
  // The echo alone reproduces the run.
  const auto b = run({"gen", "--config", p("data/config.resolved.json"), "--out", p("data_echo")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(read_file(p("data_echo/manifest.tsv")), read_file(p("data/manifest.tsv")));
}

TEST_F(CliFlow, TrainWritesCheckpointAndReport) {
  EXPECT_TRUE(fs::exists(p("run/model.ckpt")));
  const std::string report = read_file(p("run/train_report.txt"));
  EXPECT_NE(report.find("kind = siamese_triplet"), std::string::npos);
  EXPECT_NE(report.find("epoch.1.loss"), std::string::npos);
  EXPECT_NE(read_file(p("run/config.resolved.json")).find("\"epochs\": 1"), std::string::npos);
}

TEST_F(CliFlow, SimSiamReportsDoseBranch) {
  const auto t = run(with({"train", "--model", "simsiam", "--data", p("data"), "--epochs", "1",
                           "--out", p("run_simsiam")},
                          kTiny));
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(read_file(p("run_simsiam/train_report.txt")).find("dose_branch = true"), std::string::npos);
}

TEST_F(CliFlow, DivergenceIsNumericExit) {
  const auto t = run(with({"train", "--model", "vanilla_autoencoder", "--data", p("data"),
                           "--epochs", "3", "--lr", "1e30", "--out", p("run_nan")},
                          kTiny));
  EXPECT_EQ(t.code, 4) << t.err;
  EXPECT_NE(t.err.find("epoch"), std::string::npos);
  EXPECT_NE(t.err.find("batch"), std::string::npos);
}

TEST_F(CliFlow, IndexQueryAndRebuild) {
  const auto a = run({"index", "--data", p("data"), "--checkpoint", p("run/model.ckpt"), "--out", p("idx1")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("count 74 dim 8"), std::string::npos) << a.out;
  const auto b = run({"index", "--data", p("data"), "--checkpoint", p("run/model.ckpt"), "--threads",
                      "2", "--out", p("idx2")});
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(read_file(p("idx1/index.plix")), read_file(p("idx2/index.plix")));
  const auto t = run({"index", "--data", p("data"), "--checkpoint", p("run/model.ckpt"), "--split",
                      "test", "--out", p("idx_test")});
  EXPECT_NE(t.out.find("count 40"), std::string::npos) << t.out;

  const std::vector<std::string> base{"query", "--data", p("data"), "--checkpoint",
                                      p("run/model.ckpt"), "--index", p("idx1/index.plix")};
  const auto self = run(with(base, {"--case", "case_0005", "-k", "3", "--out", p("q1")}));
  ASSERT_EQ(self.code, 0) << self.err;
  EXPECT_NE(self.out.find("1\tcase_0005\t0\t"), std::string::npos) << self.out;

  const auto site = run(with(base, {"--case", "case_0005", "-k", "5", "--filter",
                                    "site=head_and_neck", "--out", p("q2")}));
  ASSERT_EQ(site.code, 0);
  const auto db = index::PlanIndex::load(p("idx1/index.plix"));
  std::istringstream rows(read_file(p("q2/query.tsv")));
  std::string line;
  std::getline(rows, line);
  int n = 0;
  while (std::getline(rows, line)) {
    const auto id = line.substr(line.find('\t') + 1, 9);
    EXPECT_EQ(db.find(id)->meta.criteria.site, volumes::BodySite::kHeadAndNeck);
    ++n;
  }
  EXPECT_EQ(n, 5);

  const auto few = run(with(base, {"--case", "case_0005", "-k", "5", "--filter", "class_id=1",
                                   "--slices", "--out", p("q3")}));
  ASSERT_EQ(few.code, 0) << few.err;
  EXPECT_NE(few.out.find("note: requested k=5"), std::string::npos);
  EXPECT_TRUE(fs::exists(p("q3/slices/query_case_0005.ct.pgm")));
  const std::string hits = read_file(p("q3/query.tsv"));
  const auto hit_count = std::count(hits.begin(), hits.end(), '\n') - 1;
  EXPECT_LT(hit_count, 5);
  const auto files = std::distance(fs::directory_iterator(p("q3/slices")), fs::directory_iterator());
  EXPECT_EQ(files, 2 * (hit_count + 1));

  const auto empty = run(with(base, {"--case", "case_0005", "--filter", "site=prostate", "--filter",
                                     "protocol=head_and_neck_single_level", "--out", p("q4")}));
  EXPECT_EQ(empty.code, 3);
  EXPECT_EQ(run(with(base, {"--out", p("q5")})).code, 2);
  EXPECT_EQ(run(with(base, {"--case", "case_0005", "--filter", "colour=red", "--out", p("q6")})).code, 2);
}

TEST_F(CliFlow, EvalIsDeterministic) {
  const std::vector<std::string> args{"eval", "--data", p("data"), "--model",
                                      "a=" + p("run/model.ckpt"), "--model",
                                      "b=" + p("run/model.ckpt")};
  const auto one = run(with(args, {"--out", p("ev1")}));
  ASSERT_EQ(one.code, 0) << one.err;
  const auto two = run(with(args, {"--threads", "2", "--out", p("ev2")}));
  ASSERT_EQ(two.code, 0) << two.err;
  for (const char* f : {"metrics.csv", "comparison.csv", "pca_a.csv", "report_b.json"}) {
    EXPECT_EQ(read_file(p(std::string("ev1/") + f)), read_file(p(std::string("ev2/") + f))) << f;
  }
  const std::string cmp = read_file(p("ev1/comparison.csv"));
  EXPECT_EQ(std::count(cmp.begin(), cmp.end(), '\n'), 3);
  EXPECT_EQ(run({"eval", "--data", p("data"), "--out", p("ev3")}).code, 2);
  EXPECT_EQ(run(with(args, {"--split", "validation", "--max-k", "99", "--out", p("ev4")})).code, 2);
}

}  // namespace
}  // namespace planret::cli
