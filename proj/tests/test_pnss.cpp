#include <gtest/gtest.h>

#include "pnss/pnss.hpp"
#include "support/oracles.hpp"

using namespace pnss;

namespace {

std::vector<Configuration> noisy_shapes(std::uint64_t seed, int n, Eigen::Index k, Eigen::Index m, double spread) {
  std::mt19937_64 rng(seed);
  const Matrix base = oracle::gaussian(rng, k, m);
  std::vector<Configuration> cs;
  for (int i = 0; i < n; ++i)
    cs.emplace_back((base + spread * oracle::gaussian(rng, k, m)) * oracle::random_rotation(rng, m));
  return cs;
}

PnssOptions with_p(Eigen::Index p) {
  PnssOptions o;
  o.p = p;
  return o;
}

}  // namespace

TEST(Embedding, InverseRecoversScores) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 100; ++t) {
    const Vector lambda = 0.5 * oracle::gaussian(rng, 4);
    const Vector g = embed_scores(lambda);
    EXPECT_NEAR(g.norm(), 1.0, 1e-14);
    EXPECT_LT((sphere_to_pc_scores(g) - lambda).norm(), 1e-10);
  }
}

TEST(Embedding, ZeroScoresMapToPole) {
  const Vector g = embed_scores(Vector::Zero(3));
  ASSERT_EQ(g.size(), 4);
  EXPECT_EQ(g[0], 1.0);
  for (Eigen::Index j = 1; j < 4; ++j) EXPECT_EQ(g[j], 0.0);
  EXPECT_EQ(sphere_to_pc_scores(g), Vector::Zero(3));
}

TEST(Embedding, KnownPoint) {
  Vector g(3);
  g << std::cos(1.0), std::sin(1.0), 0.0;
  const Vector l = sphere_to_pc_scores(g);
  EXPECT_NEAR(l[0], 1.0, 1e-14);
  EXPECT_NEAR(l[1], 0.0, 1e-14);
  Vector anti(3);
  anti << -1.0, 0.0, 0.0;
  EXPECT_THROW(sphere_to_pc_scores(anti), AntipodalError);
}

TEST(Embedding, FittedColumnsMatchScoreEmbedding) {
  const auto cs = noisy_shapes(62, 30, 6, 3, 0.3);
  const GPAResult g = gpa(cs);
  const ShapePCAModel pca = fit_shape_pca(g);
  const Matrix lambda = rescaled_scores(pca, 3);
  const Matrix x = embed_on_sphere(g, pca, 3);
  ASSERT_EQ(x.rows(), 4);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    EXPECT_NEAR(x.col(i).norm(), 1.0, 1e-12);
    EXPECT_LT((x.col(i) - embed_scores(lambda.row(i).transpose())).norm(), 1e-12);
    const double rho = oracle::arc(g.fits[static_cast<std::size_t>(i)].fitted.vec(), g.mean.vec());
    EXPECT_LE(lambda.row(i).norm(), rho + 1e-12);
  }
}

TEST(ComponentBound, RangeErrorNamesBound) {
  // k = 6, m = 3: bound is 3*5 - 3 - 1 = 11.
  EXPECT_EQ(max_pnss_components(6, 3), 10);
  EXPECT_NO_THROW(check_pnss_components(10, 6, 3));
  EXPECT_NO_THROW(check_pnss_components(2, 6, 3));
  EXPECT_THROW(check_pnss_components(1, 6, 3), RangeError);
  try {
    check_pnss_components(11, 6, 3);
    FAIL() << "expected RangeError";
  } catch (const RangeError& e) {
    EXPECT_NE(std::string(e.what()).find("11"), std::string::npos) << e.what();
  }
  const auto cs = noisy_shapes(63, 30, 6, 3, 0.3);
  EXPECT_THROW(fit_pnss(cs, with_p(11)), RangeError);
}

TEST(ComponentChoice, SmallestPReachingThreshold) {
  const auto cs = noisy_shapes(64, 40, 6, 3, 0.3);
  const ShapePCAModel pca = fit_shape_pca(gpa(cs));
  const auto cum = cumulative_variance(pca);
  const Eigen::Index p = choose_components(pca, 0.9);
  EXPECT_GE(p, 2);
  EXPECT_GE(cum[static_cast<std::size_t>(p - 1)], 90.0 - 1e-9);
  if (p > 2) EXPECT_LT(cum[static_cast<std::size_t>(p - 2)], 90.0);
}

TEST(FitPnss, ProjectionReproducesScores) {
  const auto cs = noisy_shapes(65, 40, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(4));
  EXPECT_EQ(model.scores().rows(), 4);
  for (std::size_t i = 0; i < cs.size(); ++i)
    EXPECT_LT((pnss_project(model, cs[i]) - model.scores().col(static_cast<Eigen::Index>(i))).norm(), 1e-8);
}

TEST(FitPnss, ScoreConfigurationRoundTrip) {
  const auto cs = noisy_shapes(66, 40, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(4));
  for (Eigen::Index i = 0; i < 5; ++i) {
    const Vector z = model.scores().col(i);
    const Configuration c = pnss_configuration(model, z);
    EXPECT_LT((pnss_project(model, c) - z).norm(), 1e-8);
  }
}

TEST(FitPnss, TooFewShapes) {
  const auto cs = noisy_shapes(67, 5, 6, 3, 0.25);
  EXPECT_THROW(fit_pnss(cs, with_p(4)), UnderdeterminedError);
}

TEST(FitPnss, MeanShapeNearBase) {
  std::mt19937_64 rng(68);
  const Matrix base = oracle::gaussian(rng, 6, 3);
  std::vector<Configuration> cs;
  for (int i = 0; i < 50; ++i) cs.emplace_back(base + 0.01 * oracle::gaussian(rng, 6, 3));
  const PNSSModel model = fit_pnss(cs, with_p(3));
  const Configuration mean = pnss_mean_shape(model);
  EXPECT_LT(riemannian_shape_distance(mean, Configuration(base)), 0.02);
}

TEST(PrincipalArc, MiddleEqualsMeanAndOffsetsSymmetric) {
  const auto cs = noisy_shapes(69, 40, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(3));
  const Configuration mean = pnss_mean_shape(model);
  for (Eigen::Index j = 1; j <= 3; ++j) {
    const PrincipalArc arc = principal_arc(model, j, 1.0, 11);
    ASSERT_EQ(arc.configurations.size(), 11u);
    EXPECT_LT(riemannian_shape_distance(arc.configurations[5], mean), 1e-7);
    EXPECT_NEAR(arc.offsets.front(), -arc.s, 1e-14);
    EXPECT_NEAR(arc.offsets.back(), arc.s, 1e-14);
    // Endpoints reproject to (+-c s) on component j and zero elsewhere.
    const Vector z = pnss_project(model, arc.configurations.back());
    for (Eigen::Index r = 0; r < z.size(); ++r) EXPECT_NEAR(z[r], r == j - 1 ? arc.s : 0.0, 1e-7);
  }
}

TEST(PrincipalArc, ZeroWidthCollapsesToMean) {
  const auto cs = noisy_shapes(70, 30, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(3));
  const PrincipalArc arc = principal_arc(model, 2, 0.0, 5);
  for (const auto& c : arc.configurations) EXPECT_LT(riemannian_shape_distance(c, arc.configurations[2]), 1e-7);
}

TEST(PrincipalArc, SampleSdAndArguments) {
  const auto cs = noisy_shapes(71, 30, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(3));
  const auto row = model.scores().row(1);
  const double mean = row.mean();
  const double sd = std::sqrt((row.array() - mean).square().sum() / (row.size() - 1.0));
  EXPECT_NEAR(component_sd(model, 2), sd, 1e-14);
  EXPECT_THROW(principal_arc(model, 4, 1.0, 11), RangeError);
  EXPECT_THROW(principal_arc(model, 1, 1.0, 10), RangeError);
  const double too_wide = 1.01 * model.cut_point() / component_sd(model, 1);
  EXPECT_THROW(principal_arc(model, 1, too_wide, 11), RangeError);
}

TEST(FitPnss, CircularComponentSpan) {
  const auto cs = noisy_shapes(72, 30, 6, 3, 0.25);
  const PNSSModel model = fit_pnss(cs, with_p(3));
  EXPECT_NEAR(2.0 * model.cut_point(), 2.0 * kPi * model.pns.final_scale, 1e-12);
  for (Eigen::Index i = 0; i < model.scores().cols(); ++i) EXPECT_LE(std::abs(model.scores()(0, i)), model.cut_point());
}
