#include <gtest/gtest.h>

#include <algorithm>

#include "nucleikit/detection.hpp"
#include "nucleikit/fixtures.hpp"
#include "nucleikit/tuning.hpp"

namespace nk = nucleikit;

namespace {

// One nucleus annotated at (4.5, 4.5) whose cell shows bg+edge = be_level and
// whose center posterior peaks at `peak` on pixel (4, 4).
nk::ValidationItem single_nucleus(float be_level, float peak) {
  const int n = 10;
  std::array<nk::Plane<float>, 4> ch;
  ch[0] = nk::Plane<float>::Constant(n, n, 0.45f);
  ch[2] = nk::Plane<float>::Constant(n, n, 0.45f);
  ch[3] = nk::Plane<float>::Zero(n, n);
  ch[0].block(2, 2, 5, 5).setConstant(be_level / 2);
  ch[2].block(2, 2, 5, 5).setConstant(be_level / 2);
  ch[3].block(2, 2, 5, 5).setConstant(0.05f);
  ch[3](4, 4) = peak;
  ch[1] = (1.0f - ch[0] - ch[2] - ch[3]).max(0.0f);
  nk::AnnotationSet gt({{1, nk::Point(4.5, 4.5)}}, nk::ResolutionSpec(0.5), {n, n});
  return {nk::PosteriorMap(std::move(ch)), std::move(gt)};
}

std::vector<nk::ValidationItem> fixture_items(std::uint64_t seed, int count, double noise) {
  std::vector<nk::ValidationItem> items;
  for (int i = 0; i < count; ++i) {
    nk::FixtureSpec spec;
    spec.seed = nk::derive_seed(seed, static_cast<std::uint64_t>(i));
    spec.dims = {72, 72};
    spec.n_nuclei = 14;
    spec.noise_amplitude = noise;
    auto gt = nk::sample_layout(spec);
    auto post = nk::render_posteriors(gt, spec);
    items.push_back({std::move(post), std::move(gt)});
  }
  return items;
}

// Direct evaluation of one grid point: detect, match, sum counts, f1.
double oracle_f1(const std::vector<nk::ValidationItem>& items, double ke, double kc) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& item : items) {
    const auto dets = nk::detect_centers(item.posteriors, {ke, kc}, item.annotations.resolution());
    const auto m = nk::match_hungarian(dets, item.annotations, 5.0);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / denom;
}

}  // namespace

TEST(GridSearch, SingletonGrid) {
  const std::vector items{single_nucleus(0.2f, 0.8f)};
  const auto r = nk::grid_search(items, {{0.5}, {0.5}}, 5.0);
  EXPECT_EQ(r.thresholds, nk::Thresholds(0.5, 0.5));
  EXPECT_EQ(r.metrics.f1, 1.0);
  ASSERT_EQ(r.table.size(), 1u);
}

TEST(GridSearch, TwoByTwoMatchesExhaustiveOracle) {
  const std::vector items{single_nucleus(0.4f, 0.45f)};
  const nk::GridSpec grid{{0.3, 0.6}, {0.3, 0.6}};
  double best = -1;
  std::pair<double, double> arg;
  for (const double ke : grid.kappa_e_values) {
    for (const double kc : grid.kappa_c_values) {
      const double f = oracle_f1(items, ke, kc);
      if (f > best) {
        best = f;
        arg = {ke, kc};
      }
    }
  }
  ASSERT_EQ(arg, (std::pair{0.6, 0.3}));
  ASSERT_EQ(oracle_f1(items, 0.6, 0.6), 0.0);
  ASSERT_EQ(oracle_f1(items, 0.3, 0.3), 0.0);

  const auto r = nk::grid_search(items, grid, 5.0);
  EXPECT_EQ(r.thresholds, nk::Thresholds(0.6, 0.3));
  EXPECT_EQ(r.metrics.f1, best);
  ASSERT_EQ(r.table.size(), 4u);
  for (const auto& p : r.table) EXPECT_EQ(p.metrics.f1, oracle_f1(items, p.kappa_e, p.kappa_c));
  EXPECT_EQ(r.table[1].kappa_e, 0.3);
  EXPECT_EQ(r.table[1].kappa_c, 0.6);
}

TEST(GridSearch, TiesPreferHigherKappaC) {
  const std::vector items{single_nucleus(0.2f, 0.8f)};
  const auto r = nk::grid_search(items, {{0.6}, {0.3, 0.6}}, 5.0);
  EXPECT_EQ(r.table[0].metrics.f1, r.table[1].metrics.f1);
  EXPECT_EQ(r.thresholds, nk::Thresholds(0.6, 0.6));
}

TEST(GridSearch, TiesThenPreferHigherKappaE) {
  const std::vector items{single_nucleus(0.2f, 0.8f)};
  const auto r = nk::grid_search(items, {{0.3, 0.6}, {0.5}}, 5.0);
  EXPECT_EQ(r.thresholds, nk::Thresholds(0.6, 0.5));
}

TEST(GridSearch, SelfConsistentAndOnGrid) {
  const auto items = fixture_items(3, 4, 0.1);
  const nk::GridSpec grid;
  const auto r = nk::grid_search(items, grid, 5.0);
  EXPECT_EQ(nk::evaluate_thresholds(items, r.thresholds, 5.0).metrics.f1, r.metrics.f1);
  EXPECT_EQ(oracle_f1(items, r.thresholds.kappa_e, r.thresholds.kappa_c), r.metrics.f1);
  EXPECT_NE(std::find(grid.kappa_e_values.begin(), grid.kappa_e_values.end(), r.thresholds.kappa_e),
            grid.kappa_e_values.end());
  EXPECT_NE(std::find(grid.kappa_c_values.begin(), grid.kappa_c_values.end(), r.thresholds.kappa_c),
            grid.kappa_c_values.end());
  EXPECT_EQ(r.table.size(), 361u);
  for (const auto& p : r.table) EXPECT_LE(p.metrics.f1, r.metrics.f1);
}

TEST(GridSearch, IndependentOfThreadCount) {
  const auto items = fixture_items(9, 3, 0.15);
  const auto one = nk::grid_search(items, {}, 5.0, 1);
  const auto many = nk::grid_search(items, {}, 5.0, 4);
  EXPECT_EQ(one.thresholds, many.thresholds);
  EXPECT_EQ(one.metrics, many.metrics);
  ASSERT_EQ(one.table.size(), many.table.size());
  for (std::size_t i = 0; i < one.table.size(); ++i) {
    EXPECT_EQ(one.table[i].tp, many.table[i].tp);
    EXPECT_EQ(one.table[i].fp, many.table[i].fp);
    EXPECT_EQ(one.table[i].metrics, many.table[i].metrics);
  }
}

TEST(GridSearch, GeneralizesAcrossHalves) {
  auto items = fixture_items(17, 8, 0.1);
  const std::vector<nk::ValidationItem> half_a(items.begin(), items.begin() + 4);
  const std::vector<nk::ValidationItem> half_b(items.begin() + 4, items.end());
  const auto tuned_a = nk::grid_search(half_a, {}, 5.0);
  const auto own_b = nk::grid_search(half_b, {}, 5.0);
  const double transferred = nk::evaluate_thresholds(half_b, tuned_a.thresholds, 5.0).metrics.f1;
  EXPECT_GE(transferred, own_b.metrics.f1 - 0.05);
}

TEST(GridSearch, RejectsBadInput) {
  const std::vector items{single_nucleus(0.2f, 0.8f)};
  EXPECT_THROW(nk::grid_search({}, {}, 5.0), nk::Error);
  EXPECT_THROW(nk::grid_search(items, {{}, {0.5}}, 5.0), nk::Error);
  EXPECT_THROW(nk::grid_search(items, {{0.5, 0.4}, {0.5}}, 5.0), nk::Error);
  EXPECT_THROW(nk::grid_search(items, {{0.5}, {1.0}}, 5.0), nk::Error);
}

TEST(GridSpec, DefaultAxis) {
  const auto axis = nk::GridSpec::default_axis();
  ASSERT_EQ(axis.size(), 19u);
  EXPECT_EQ(axis.front(), 0.05);
  EXPECT_EQ(axis[9], 0.5);
  EXPECT_EQ(axis.back(), 0.95);
}
