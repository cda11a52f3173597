#include <gtest/gtest.h>

#include <algorithm>

#include "nucleikit/io.hpp"
#include "nucleikit/manifest.hpp"
#include "support/manifest_builder.hpp"
#include "support/oracles.hpp"

namespace nk = nucleikit;
using nk::testing::EntrySketch;
using nk::testing::TempDir;
using nk::testing::write_manifest_sketch;

namespace {

nk::ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const nk::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected nucleikit::Error";
  return nk::ErrorCode::invariant;
}

auto sorted(std::vector<nk::TrainingPair> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return std::tie(a.image, a.annotations, a.synthetic) < std::tie(b.image, b.annotations, b.synthetic);
  });
  return v;
}

}  // namespace

TEST(Manifest, ZeroEntriesIsEmpty) {
  TempDir dir("m0");
  nk::write_file(dir / "manifest.json", R"({"entries": []})");
  const auto m = nk::load_manifest(dir / "manifest.json");
  EXPECT_TRUE(m.entries.empty());
  EXPECT_TRUE(m.ensembles.empty());
}

TEST(Manifest, MissingAnnotationFileIsDangling) {
  TempDir dir("mdang");
  const auto path = write_manifest_sketch(dir.path(), {{"a", "train", 3, 0}});
  std::filesystem::remove(dir / "ann/a.csv");
  try {
    nk::load_manifest(path);
    FAIL() << "expected an error";
  } catch (const nk::Error& e) {
    EXPECT_EQ(e.code(), nk::ErrorCode::dangling_reference);
    EXPECT_NE(std::string(e.what()).find("a.csv"), std::string::npos) << e.what();
  }
}

TEST(Manifest, MissingFileAndMalformedDocument) {
  TempDir dir("mbad");
  EXPECT_EQ(code_of([&] { nk::load_manifest(dir / "none.json"); }), nk::ErrorCode::io);
  nk::write_file(dir / "bad.json", "{ entries: ");
  EXPECT_EQ(code_of([&] { nk::load_manifest(dir / "bad.json"); }), nk::ErrorCode::parse);
  nk::write_file(dir / "bad2.json", R"({"entries": [{"image": "x"}]})");
  EXPECT_EQ(code_of([&] { nk::load_manifest(dir / "bad2.json"); }), nk::ErrorCode::parse);
}

TEST(Manifest, ImageInTwoSplitsIsDuplicate) {
  TempDir dir("mdup");
  write_manifest_sketch(dir.path(), {{"a", "train", 3, 0}});
  nk::write_file(dir / "manifest.json", R"({"entries": [
    {"image": "img/a.png", "annotations": "ann/a.csv", "microns_per_pixel": 0.5, "split": "train"},
    {"image": "img/a.png", "annotations": "ann/a.csv", "microns_per_pixel": 0.5, "split": "test"}]})");
  try {
    nk::load_manifest(dir / "manifest.json");
    FAIL() << "expected an error";
  } catch (const nk::Error& e) {
    EXPECT_EQ(e.code(), nk::ErrorCode::duplicate);
    EXPECT_NE(std::string(e.what()).find("multiple splits"), std::string::npos);
  }
}

TEST(Manifest, UnknownEnsembleGroupIsDangling) {
  TempDir dir("mgrp");
  write_manifest_sketch(dir.path(), {{"a", "train", 3, 0}});
  nk::write_file(dir / "manifest.json", R"({"entries": [
    {"image": "img/a.png", "annotations": "ann/a.csv", "microns_per_pixel": 0.5,
     "split": "train", "variant_group": "nope"}]})");
  EXPECT_EQ(code_of([&] { nk::load_manifest(dir / "manifest.json"); }),
            nk::ErrorCode::dangling_reference);
}

TEST(Manifest, TwoTrainEntriesOneEnsembleExpandToFourPairs) {
  TempDir dir("m4");
  const auto path = write_manifest_sketch(dir.path(), {{"src", "train", 5, 3}, {"tgt", "train", 4, 0}});
  const auto m = nk::load_manifest(path);
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(nk::compose_training_set(m, nk::SupervisionMode::cross).size(), 4u);
}

TEST(Manifest, SaveLoadRoundTrip) {
  TempDir dir("msave");
  const auto path = write_manifest_sketch(dir.path(), {{"src", "train", 5, 2}, {"v", "validation", 4, 0}});
  const auto m = nk::load_manifest(path);
  nk::save_manifest(m, dir / "copy.json");
  EXPECT_EQ(nk::load_manifest(dir / "copy.json"), m);
}

TEST(Manifest, LoadingTwiceIsDeterministic) {
  TempDir dir("mdet");
  const auto path = write_manifest_sketch(
      dir.path(), {{"a", "train", 5, 2}, {"b", "train", 7, 0}, {"c", "test", 3, 0}});
  EXPECT_EQ(nk::load_manifest(path), nk::load_manifest(path));
}

TEST(Compose, InterSharesSourceAnnotation) {
  TempDir dir("cinter");
  const auto m = nk::load_manifest(write_manifest_sketch(dir.path(), {{"src", "train", 5, 3}}));
  const auto set = nk::compose_training_set(m, nk::SupervisionMode::inter);
  ASSERT_EQ(set.size(), 3u);
  for (const auto& p : set) {
    EXPECT_TRUE(p.synthetic);
    EXPECT_EQ(p.annotations, m.entries[0].annotations);
  }
}

TEST(Compose, IntraWithZeroNucleiIsEmpty) {
  TempDir dir("czero");
  const auto m = nk::load_manifest(write_manifest_sketch(dir.path(), {{"t", "train", 30, 0}}));
  EXPECT_TRUE(nk::compose_training_set(m, nk::SupervisionMode::intra, 0).empty());
}

TEST(Compose, CrossTakesWholeImagesUntilCountReached) {
  TempDir dir("ccross");
  const auto m = nk::load_manifest(write_manifest_sketch(
      dir.path(), {{"src", "train", 10, 2}, {"t1", "train", 30, 0}, {"t2", "train", 40, 0},
                   {"t3", "train", 50, 0}}));
  const auto set = nk::compose_training_set(m, nk::SupervisionMode::cross, 60);
  ASSERT_EQ(set.size(), 4u);
  EXPECT_TRUE(set[0].synthetic);
  EXPECT_TRUE(set[1].synthetic);
  EXPECT_EQ(set[2].image.filename(), "t1.png");
  EXPECT_EQ(set[3].image.filename(), "t2.png");
  EXPECT_FALSE(set[3].synthetic);
}

TEST(Compose, ExactCountStopsAtThatImage) {
  TempDir dir("cexact");
  const auto m = nk::load_manifest(
      write_manifest_sketch(dir.path(), {{"t1", "train", 30, 0}, {"t2", "train", 40, 0}}));
  EXPECT_EQ(nk::compose_training_set(m, nk::SupervisionMode::intra, 30).size(), 1u);
  EXPECT_EQ(nk::compose_training_set(m, nk::SupervisionMode::intra, 31).size(), 2u);
  EXPECT_EQ(nk::compose_training_set(m, nk::SupervisionMode::intra).size(), 2u);
}

TEST(Compose, ErrorsOnShortfallAndMissingVariants) {
  TempDir dir("cerr");
  const auto m = nk::load_manifest(write_manifest_sketch(dir.path(), {{"t1", "train", 30, 0}}));
  EXPECT_EQ(code_of([&] { nk::compose_training_set(m, nk::SupervisionMode::intra, 31); }),
            nk::ErrorCode::insufficient_data);
  EXPECT_EQ(code_of([&] { nk::compose_training_set(m, nk::SupervisionMode::inter); }),
            nk::ErrorCode::insufficient_data);
}

TEST(Compose, InterUnionIntraEqualsCross) {
  TempDir dir("cunion");
  const auto m = nk::load_manifest(write_manifest_sketch(
      dir.path(), {{"s1", "train", 8, 2}, {"t1", "train", 30, 0}, {"s2", "train", 9, 3},
                   {"t2", "train", 40, 0}, {"t3", "train", 50, 0}, {"v", "validation", 5, 0}}));
  for (const std::optional<std::size_t> n : {std::optional<std::size_t>{}, std::optional<std::size_t>{0},
                                             std::optional<std::size_t>{1}, std::optional<std::size_t>{70},
                                             std::optional<std::size_t>{120}}) {
    auto uni = nk::compose_training_set(m, nk::SupervisionMode::inter, n);
    const auto intra = nk::compose_training_set(m, nk::SupervisionMode::intra, n);
    uni.insert(uni.end(), intra.begin(), intra.end());
    EXPECT_EQ(sorted(uni), sorted(nk::compose_training_set(m, nk::SupervisionMode::cross, n)));
  }
}

TEST(Compose, ValidationSplitIsSelectable) {
  TempDir dir("csplit");
  const auto m = nk::load_manifest(
      write_manifest_sketch(dir.path(), {{"t1", "train", 3, 0}, {"v1", "validation", 4, 0}}));
  const auto set = nk::compose_training_set(m, nk::SupervisionMode::intra, {}, nk::Split::validation);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].image.filename(), "v1.png");
}
