#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "slideagg/cli.hpp"
#include "slideagg/csv.hpp"
#include "slideagg/features.hpp"
#include "slideagg/ingest.hpp"
#include "test_util.hpp"

namespace slideagg {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Two malignant and two normal slides, written by hand.
void write_fixture(const testing::TempDir& dir) {
  testing::write_file(dir / "data/a.csv", "x,y,prob_malignant\n50,50,0.9\n150,50,0.8\n250,50,0.1\n");
  testing::write_file(dir / "data/b.csv", "x,y,prob_malignant\n50,50,0.7\n1050,1050,0.95\n");
  testing::write_file(dir / "data/c.csv", "x,y,prob_malignant\n50,50,0.1\n150,50,0.2\n");
  testing::write_file(dir / "data/d.csv", "x,y,prob_malignant\n");
  testing::write_file(dir / "data/manifest.csv",
                      "slide_id,label,predictions_path\na,malignant,a.csv\nb,malignant,b.csv\nc,normal,c.csv\nd,normal,d.csv\n");
}

TEST(Cli, ExtractWritesFeatureTable) {
  testing::TempDir dir;
  write_fixture(dir);
  const auto r = run({"extract", "--manifest", (dir / "data/manifest.csv").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto text = testing::read_file(dir / "out/features.csv");
  EXPECT_EQ(line_count(text), 5u);
  EXPECT_EQ(text.substr(0, text.find('\n')), feature_csv_header());
  const auto data = read_feature_csv(dir / "out/features.csv");
  ASSERT_EQ(data.size(), 4u);
  EXPECT_EQ(data[0].slide_id, "a");
  EXPECT_DOUBLE_EQ(data[0].features.mtr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(data[1].features.mcc(4), 1.0);
  EXPECT_EQ(data[3].features.flatten(), FlatFeatures::Zero());
}

TEST(Cli, EmptyManifestGivesHeaderOnly) {
  testing::TempDir dir;
  testing::write_file(dir / "manifest.csv", "slide_id,label,predictions_path\n");
  const auto r = run({"extract", "--manifest", (dir / "manifest.csv").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(testing::read_file(dir / "out/features.csv"), feature_csv_header() + "\n");
}

TEST(Cli, ExitCodes) {
  testing::TempDir dir;
  write_fixture(dir);
  const auto manifest = (dir / "data/manifest.csv").string();
  const auto out = (dir / "out").string();
  EXPECT_EQ(run({"extract", "--manifest", (dir / "missing.csv").string(), "--out", out}).code, kExitIo);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"cv", "--manifest", manifest, "--out", out, "--k", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"cv", "--manifest", manifest, "--out", out, "--model", "xgboost"}).code, kExitUsage);
  EXPECT_EQ(run({"compare", "--manifest", manifest, "--out", out, "--classifiers", "knn,bogus"}).code, kExitUsage);
  // Two slides per class cannot fill five folds.
  EXPECT_EQ(run({"cv", "--manifest", manifest, "--out", out, "--model", "knn"}).code, kExitUsage);
  EXPECT_EQ(run({"cv", "--out", out}).code, kExitUsage);
  EXPECT_EQ(run({"synth", "--out", out, "--noise-rate", "1.5"}).code, kExitUsage);

  testing::write_file(dir / "bad/manifest.csv", "slide_id,label,predictions_path\na,malignant,a.csv\n");
  testing::write_file(dir / "bad/a.csv", "x,y,prob_malignant\n50,50,1.5\n");
  EXPECT_EQ(run({"extract", "--manifest", (dir / "bad/manifest.csv").string(), "--out", out}).code, kExitValidation);
  testing::write_file(dir / "dup/manifest.csv",
                      "slide_id,label,predictions_path\na,malignant,a.csv\na,normal,a.csv\n");
  testing::write_file(dir / "dup/a.csv", "x,y,prob_malignant\n");
  EXPECT_EQ(run({"extract", "--manifest", (dir / "dup/manifest.csv").string(), "--out", out}).code, kExitValidation);
}

TEST(Cli, ValidateSummarises) {
  testing::TempDir dir;
  write_fixture(dir);
  const auto r = run({"validate", "--manifest", (dir / "data/manifest.csv").string()});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("malignant,2"), std::string::npos);
  EXPECT_NE(r.out.find("normal,2"), std::string::npos);
  EXPECT_NE(r.out.find("zero_patch,d"), std::string::npos);
}

TEST(Cli, ModelFileErrors) {
  testing::TempDir dir;
  write_fixture(dir);
  const auto slide = (dir / "data/a.csv").string();
  EXPECT_EQ(run({"predict", "--model-file", (dir / "none.json").string(), "--slide", slide}).code, kExitIo);
  testing::write_file(dir / "corrupt.json", "{\"format\": \"slideagg-model\", \"version\": 1, \"graph\": ");
  EXPECT_EQ(run({"predict", "--model-file", (dir / "corrupt.json").string(), "--slide", slide}).code, kExitIo);
}

TEST(Cli, SynthTrainPredict) {
  testing::TempDir dir;
  const auto data = (dir / "data").string();
  ASSERT_EQ(run({"synth", "--out", data, "--n-per-label", "6", "--grid", "8", "--seed", "3"}).code, kExitOk);
  const auto manifest = load_manifest(dir / "data/manifest.csv");
  ASSERT_EQ(manifest.entries.size(), 12u);

  auto r = run({"train", "--manifest", (dir / "data/manifest.csv").string(), "--out", (dir / "model").string(),
                "--epochs", "3", "--seed", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = run({"predict", "--model-file", (dir / "model/model.json").string(), "--slide",
           (dir / "data/slides/malignant_000.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto space = r.out.find(' ');
  ASSERT_NE(space, std::string::npos);
  const auto label = r.out.substr(0, space);
  EXPECT_TRUE(label == "malignant" || label == "normal") << r.out;
  const double p = *csv::parse_real(r.out.substr(space + 1, r.out.size() - space - 2));
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(label == "malignant", p >= 0.5);
}

TEST(Cli, SynthIsDeterministic) {
  testing::TempDir dir;
  ASSERT_EQ(run({"synth", "--out", (dir / "a").string(), "--n-per-label", "2", "--grid", "5"}).code, kExitOk);
  ASSERT_EQ(run({"synth", "--out", (dir / "b").string(), "--n-per-label", "2", "--grid", "5"}).code, kExitOk);
  EXPECT_EQ(testing::read_file(dir / "a/manifest.csv"), testing::read_file(dir / "b/manifest.csv"));
  EXPECT_EQ(testing::read_file(dir / "a/slides/normal_001.csv"), testing::read_file(dir / "b/slides/normal_001.csv"));
  EXPECT_EQ(line_count(testing::read_file(dir / "a/slides/normal_001.csv")), 26u);
}

TEST(Cli, CvAndCompareWriteReports) {
  testing::TempDir dir;
  ASSERT_EQ(run({"synth", "--out", (dir / "data").string(), "--n-per-label", "6", "--grid", "8"}).code, kExitOk);
  const auto manifest = (dir / "data/manifest.csv").string();
  auto r = run({"cv", "--manifest", manifest, "--out", (dir / "cv").string(), "--model", "knn", "--k", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(testing::read_file(dir / "cv/cv_knn.csv"), r.out);
  EXPECT_EQ(line_count(r.out), 5u);
  EXPECT_EQ(line_count(testing::read_file(dir / "cv/folds.csv")), 13u);
  EXPECT_TRUE(std::filesystem::exists(dir / "cv/cv_knn.json"));

  r = run({"compare", "--manifest", manifest, "--out", (dir / "cmp").string(), "--k", "3", "--classifiers",
           "svm,rf,knn"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(testing::read_file(dir / "cmp/comparison.csv"), r.out);
  EXPECT_EQ(line_count(r.out), 4u);
  EXPECT_EQ(testing::read_file(dir / "cmp/cv_knn.csv"), testing::read_file(dir / "cv/cv_knn.csv"));
}

TEST(Heatmap, CropsToOccupiedCells) {
  SlideRecord slide{"s", Label::Normal, {{150, 250, 0.5}, {350, 250, 0.25}, {150, 450, 1.0}, {160, 260, 0.75}}};
  EXPECT_EQ(heatmap_csv(slide), "0.75,,0.25\n,,\n1,,\n");
  EXPECT_EQ(heatmap_csv(SlideRecord{}), "");
}

TEST(Heatmap, CommandWritesFile) {
  testing::TempDir dir;
  write_fixture(dir);
  ASSERT_EQ(run({"heatmap", "--slide", (dir / "data/c.csv").string(), "--out", (dir / "hm").string()}).code, kExitOk);
  EXPECT_EQ(testing::read_file(dir / "hm/heatmap.csv"), "0.1,0.2\n");
  ASSERT_EQ(run({"heatmap", "--slide", (dir / "data/d.csv").string(), "--out", (dir / "hm2").string()}).code, kExitOk);
  EXPECT_EQ(testing::read_file(dir / "hm2/heatmap.csv"), "");
}

}  // namespace
}  // namespace slideagg
