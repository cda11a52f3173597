#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>

#include "nucleikit/io.hpp"
#include "support/oracles.hpp"

namespace nk = nucleikit;
using nk::testing::TempDir;

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

std::string message_of(const auto& fn) {
  try {
    fn();
  } catch (const nk::Error& e) {
    return e.what();
  }
  return {};
}

nk::Plane<float> random_plane(std::mt19937& rng, int h, int w) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  nk::Plane<float> p(h, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  return p;
}

bool bit_equal(const nk::Plane<float>& a, const nk::Plane<float>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

const nk::ResolutionSpec kRes{0.5};
const nk::Dims k100{100, 100};

}  // namespace

TEST(Annotations, HeaderOnlyIsEmpty) {
  const auto set = nk::parse_annotations("id,x_px,y_px\n", kRes, k100);
  EXPECT_TRUE(set.empty());
}

TEST(Annotations, ParsesRowsInFileOrder) {
  const auto set = nk::parse_annotations("id,x_px,y_px\n1,10.0,12.5\n2,3.0,4.0\n", kRes, k100);
  ASSERT_EQ(set.size(), 2u);
  EXPECT_EQ(set.points()[0].id, 1);
  EXPECT_EQ(set.points()[1].id, 2);
  EXPECT_EQ(set.position(0), nk::Point(10.0, 12.5));
  EXPECT_EQ(set.position(1), nk::Point(3.0, 4.0));
}

TEST(Annotations, OutOfBoundsCitesIdAndLine) {
  const auto parse = [] {
    nk::parse_annotations("id,x_px,y_px\n1,10.0,12.5\n7,120.0,4.0\n", kRes, k100);
  };
  EXPECT_EQ(code_of(parse), nk::ErrorCode::out_of_bounds);
  const auto msg = message_of(parse);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("id 7"), std::string::npos) << msg;
}

TEST(Annotations, DuplicatesAreRejected) {
  EXPECT_EQ(code_of([] { nk::parse_annotations("id,x_px,y_px\n1,1,1\n1,2,2\n", kRes, k100); }),
            nk::ErrorCode::duplicate);
  EXPECT_EQ(code_of([] { nk::parse_annotations("id,x_px,y_px\n1,1,1\n2,1,1\n", kRes, k100); }),
            nk::ErrorCode::duplicate);
}

TEST(Annotations, BadRowCitesLine) {
  const auto parse = [] { nk::parse_annotations("id,x_px,y_px\n1,1,1\n\n2,abc,3\n", kRes, k100); };
  EXPECT_EQ(code_of(parse), nk::ErrorCode::parse);
  EXPECT_NE(message_of(parse).find("line 4"), std::string::npos);
}

TEST(Annotations, AcceptsCrlfAndBom) {
  const auto set = nk::parse_annotations("\xEF\xBB\xBFid,x_px,y_px\r\n1,10.0,12.5\r\n", kRes, k100);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.position(0), nk::Point(10.0, 12.5));
}

TEST(Annotations, WrongHeaderIsParseError) {
  EXPECT_EQ(code_of([] { nk::parse_annotations("x,y\n1,2\n", kRes, k100); }), nk::ErrorCode::parse);
}

TEST(Annotations, FileRoundTrip) {
  TempDir dir("ann");
  std::mt19937_64 rng(3);
  const auto set = nk::testing::random_annotations(rng, 50, 40, 12, 0.5);
  nk::write_annotations(dir / "a.csv", set);
  const auto back = nk::read_annotations(dir / "a.csv", kRes, {50, 40});
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back.points()[i].id, set.points()[i].id);
    EXPECT_EQ(back.position(i), set.position(i));
  }
  EXPECT_EQ(nk::count_annotations(dir / "a.csv"), 12u);
}

TEST(AnnotationSet, RejectsPointOnFarBorder) {
  EXPECT_EQ(code_of([] {
              nk::AnnotationSet({{1, nk::Point(100.0, 5.0)}}, kRes, k100);
            }),
            nk::ErrorCode::out_of_bounds);
}

TEST(Pmap, UniformPixelRoundTrip) {
  std::array<nk::Plane<float>, 4> ch;
  for (auto& c : ch) c = nk::Plane<float>::Constant(1, 1, 0.25f);
  TempDir dir("pmap");
  nk::write_pmap(nk::PosteriorMap(ch), dir / "m.pmap");
  const auto back = nk::read_pmap(dir / "m.pmap");
  ASSERT_EQ(back.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(bit_equal(back[static_cast<std::size_t>(i)], ch[static_cast<std::size_t>(i)]));
  EXPECT_EQ(nk::read_file(dir / "m.pmap").size(), nk::kPmapHeaderSize + 16);
}

TEST(Pmap, HeaderLayoutIsLittleEndian) {
  const nk::Plane<float> p = nk::Plane<float>::Zero(3, 2);
  const std::array planes{p};
  const auto bytes = nk::encode_pmap(planes);
  const std::string expected_header("PMAP\x01\x00\x01\x01\x03\x00\x00\x00\x02\x00\x00\x00", 16);
  EXPECT_EQ(bytes.substr(0, 16), expected_header);
  EXPECT_EQ(bytes.size(), 16u + 6 * 4);
}

TEST(Pmap, SeededSevenByFiveRoundTrip) {
  std::mt19937 rng(20240607);
  std::vector<nk::Plane<float>> planes;
  for (int c = 0; c < 4; ++c) planes.push_back(random_plane(rng, 5, 7));
  const auto back = nk::decode_pmap(nk::encode_pmap(planes));
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    ASSERT_EQ(back[c].rows(), 5);
    ASSERT_EQ(back[c].cols(), 7);
    for (Eigen::Index i = 0; i < back[c].size(); ++i) {
      EXPECT_EQ(std::bit_cast<std::uint32_t>(back[c].data()[i]),
                std::bit_cast<std::uint32_t>(planes[c].data()[i]));
    }
  }
}

TEST(Pmap, RandomDimsRoundTripProperty) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> dim(1, 33);
  for (int trial = 0; trial < 50; ++trial) {
    const int channels = trial % 2 == 0 ? 1 : 4;
    const int h = dim(rng);
    const int w = dim(rng);
    std::vector<nk::Plane<float>> planes;
    for (int c = 0; c < channels; ++c) planes.push_back(random_plane(rng, h, w));
    const auto bytes = nk::encode_pmap(planes);
    const auto back = nk::decode_pmap(bytes);
    ASSERT_EQ(back.size(), planes.size());
    for (std::size_t c = 0; c < planes.size(); ++c) EXPECT_TRUE(bit_equal(back[c], planes[c]));
    EXPECT_EQ(nk::encode_pmap(back), bytes);
  }
}

TEST(Pmap, WeightMapRoundTrip) {
  TempDir dir("pmapw");
  std::mt19937 rng(5);
  const nk::WeightMap w(random_plane(rng, 9, 4));
  nk::write_pmap(w, dir / "w.pmap");
  EXPECT_TRUE(bit_equal(nk::read_weight_map(dir / "w.pmap").weights(), w.weights()));
  EXPECT_EQ(nk::pmap_dims(dir / "w.pmap"), (nk::Dims{4, 9}));
  EXPECT_EQ(code_of([&] { nk::read_posterior_map(dir / "w.pmap"); }), nk::ErrorCode::bad_channels);
}

TEST(Pmap, CorruptHeadersAreRejected) {
  const std::array<nk::Plane<float>, 1> planes{nk::Plane<float>::Constant(2, 2, 1.0f)};
  const auto good = nk::encode_pmap(planes);

  auto magic = good;
  magic[1] = 'X';
  EXPECT_EQ(code_of([&] { nk::decode_pmap(magic); }), nk::ErrorCode::bad_magic);

  auto version = good;
  version[4] = 2;
  EXPECT_EQ(code_of([&] { nk::decode_pmap(version); }), nk::ErrorCode::version_mismatch);

  auto dtype = good;
  dtype[6] = 2;
  EXPECT_EQ(code_of([&] { nk::decode_pmap(dtype); }), nk::ErrorCode::version_mismatch);

  auto channels = good;
  channels[7] = 3;
  EXPECT_EQ(code_of([&] { nk::decode_pmap(channels); }), nk::ErrorCode::bad_channels);

  EXPECT_EQ(code_of([&] { nk::decode_pmap(good.substr(0, good.size() - 1)); }),
            nk::ErrorCode::truncated);
  EXPECT_EQ(code_of([&] { nk::decode_pmap(good.substr(0, 10)); }), nk::ErrorCode::truncated);
  EXPECT_EQ(code_of([&] { nk::decode_pmap(good + "x"); }), nk::ErrorCode::parse);
}

TEST(Pmap, FileWithAlteredMagic) {
  TempDir dir("pmapm");
  const std::array<nk::Plane<float>, 1> planes{nk::Plane<float>::Constant(2, 2, 1.0f)};
  auto bytes = nk::encode_pmap(planes);
  bytes[0] = 'Q';
  nk::write_file(dir / "bad.pmap", bytes);
  EXPECT_EQ(code_of([&] { nk::read_pmap(dir / "bad.pmap"); }), nk::ErrorCode::bad_magic);
}

TEST(LabelMaskPng, CodesRoundTripExactly) {
  TempDir dir("mask");
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> code(0, 3);
  nk::LabelMask mask{nk::Plane<std::uint8_t>(13, 21)};
  for (Eigen::Index i = 0; i < mask.codes.size(); ++i) {
    mask.codes.data()[i] = static_cast<std::uint8_t>(code(rng));
  }
  nk::write_label_mask(dir / "m.png", mask);
  const auto back = nk::read_label_mask(dir / "m.png");
  EXPECT_EQ(back.dims(), mask.dims());
  EXPECT_TRUE((back.codes == mask.codes).all());
  EXPECT_EQ(nk::image_dims(dir / "m.png"), (nk::Dims{21, 13}));
}

TEST(GrayPng, SixteenBitRoundTrip) {
  TempDir dir("gray");
  nk::Plane<double> v(2, 3);
  v << 0.0, 1.0, 0.5, 0.25, 1.5, -1.0;
  nk::write_gray_png(dir / "g.png", v, 16);
  const auto back = nk::read_gray_png(dir / "g.png");
  EXPECT_EQ(back.bit_depth, 16);
  EXPECT_DOUBLE_EQ(back.values(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(back.values(0, 1), 1.0);
  EXPECT_NEAR(back.values(0, 2), 0.5, 1.0 / 65535);
  EXPECT_DOUBLE_EQ(back.values(1, 1), 1.0);  // clamped
  EXPECT_DOUBLE_EQ(back.values(1, 2), 0.0);  // clamped
}

TEST(Detections, CsvRoundTripIsValueExact) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nk::DetectionSet set;
  set.resolution = nk::ResolutionSpec(0.25);
  for (int i = 0; i < 40; ++i) {
    set.detections.push_back({nk::Point(u(rng) * 512, u(rng) * 512), u(rng)});
  }
  set.detections.push_back({nk::Point(4.5, 5.5), 0.8});
  TempDir dir("det");
  nk::write_detections(dir / "d.csv", set);
  const auto back = nk::read_detections(dir / "d.csv", set.resolution);
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back.detections[i].position, set.detections[i].position);
    EXPECT_EQ(back.detections[i].score, set.detections[i].score);
  }
  EXPECT_EQ(nk::format_detections(back), nk::format_detections(set));
}

TEST(Detections, EmptySetHasHeaderOnly) {
  EXPECT_EQ(nk::format_detections({}), "x_px,y_px,score\n");
  EXPECT_TRUE(nk::parse_detections("x_px,y_px,score\n", nk::ResolutionSpec(1.0)).empty());
}

TEST(Types, ThresholdsMustBeInsideOpenInterval) {
  EXPECT_EQ(code_of([] { nk::Thresholds(0.0, 0.5); }), nk::ErrorCode::invalid_argument);
  EXPECT_EQ(code_of([] { nk::Thresholds(0.5, 1.0); }), nk::ErrorCode::invalid_argument);
  EXPECT_NO_THROW(nk::Thresholds(0.05, 0.95));
}

TEST(Types, PosteriorMapChecksSums) {
  std::array<nk::Plane<float>, 4> ch;
  for (auto& c : ch) c = nk::Plane<float>::Constant(2, 2, 0.3f);
  EXPECT_EQ(code_of([&] { nk::PosteriorMap{ch}; }), nk::ErrorCode::invariant);
}

TEST(Types, ResolutionMustBePositive) {
  EXPECT_EQ(code_of([] { nk::ResolutionSpec(0.0); }), nk::ErrorCode::invalid_argument);
  EXPECT_DOUBLE_EQ(nk::ResolutionSpec(0.5).to_microns(10.0), 5.0);
}
