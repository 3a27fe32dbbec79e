#include <gtest/gtest.h>

#include "pnss/pns.hpp"
#include "support/oracles.hpp"

using namespace pnss;

namespace {

// n points at polar angle `radius` about `axis` (ambient 3).
Matrix circle_points(const Vector& axis, double radius, int n, double phase = 0.0) {
  const Matrix r = rotate_axis_to_pole(SpherePoint(axis)).transpose();
  Matrix pts(3, n);
  for (int i = 0; i < n; ++i) {
    const double phi = phase + 2 * kPi * i / n * 0.8;
    Vector local(3);
    local << std::sin(radius) * std::cos(phi), std::sin(radius) * std::sin(phi), std::cos(radius);
    pts.col(i) = r * local;
  }
  return pts;
}

Matrix cloud(std::mt19937_64& rng, Eigen::Index ambient, int n, double spread) {
  Matrix pts(ambient, n);
  for (int i = 0; i < n; ++i) {
    Vector v = spread * oracle::gaussian(rng, ambient);
    v[ambient - 1] += 1.0;
    pts.col(i) = v.normalized();
  }
  return pts;
}

}  // namespace

TEST(FitSubsphere, ExactCircleRecovered) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    const Vector axis = oracle::random_unit(rng, 3);
    const SubsphereFit f = fit_subsphere(circle_points(axis, 0.7, 50, t * 0.3));
    EXPECT_NEAR(f.subsphere.radius, 0.7, 1e-8);
    EXPECT_LT((f.subsphere.axis.coords() - axis).norm(), 1e-8);
    for (double e : f.residuals) EXPECT_NEAR(e, 0.0, 1e-8);
  }
}

TEST(FitSubsphere, GridOracleOnRandomPoints) {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 10; ++t) {
    Matrix pts(3, 20);
    for (int j = 0; j < 20; ++j) pts.col(j) = oracle::random_unit(rng, 3);
    const SubsphereFit f = fit_subsphere(pts);
    EXPECT_LE(f.objective, oracle::grid_subsphere_objective(pts, 2.0) + 1e-6) << "instance " << t;
    EXPECT_NEAR(f.objective, oracle::subsphere_cost(pts, f.subsphere.axis.coords()), 1e-10);
  }
}

TEST(FitSubsphere, RadiusConventionAndErrors) {
  std::mt19937_64 rng(43);
  const SubsphereFit f = fit_subsphere(cloud(rng, 4, 30, 0.4));
  EXPECT_GT(f.subsphere.radius, 0.0);
  EXPECT_LE(f.subsphere.radius, kPi / 2);
  EXPECT_THROW(fit_subsphere(cloud(rng, 4, 4, 0.4)), UnderdeterminedError);
  EXPECT_NO_THROW(fit_subsphere(cloud(rng, 4, 5, 0.4)));
}

TEST(FitSubsphere, SinglePointLocation) {
  Matrix pts(3, 6);
  for (int j = 0; j < 6; ++j) pts.col(j) = Eigen::Vector3d(0, 0.6, 0.8);
  const SubsphereFit f = fit_subsphere(pts);
  EXPECT_NEAR(f.objective, 0.0, 1e-20);
  EXPECT_GT(f.subsphere.radius, 0.0);
}

TEST(PnsDecompose, ShapeAndSignedResiduals) {
  std::mt19937_64 rng(44);
  const Matrix x = cloud(rng, 5, 60, 0.5);
  const PNSModel m = pns_decompose(x);
  EXPECT_EQ(m.coordinates.rows(), 4);
  EXPECT_EQ(m.coordinates.cols(), 60);
  ASSERT_EQ(m.levels.size(), 3u);

  // Replay: residuals, scales and coordinate rows from the stored levels.
  Matrix cur = x;
  double scale = 1.0;
  for (std::size_t l = 0; l < m.levels.size(); ++l) {
    const PNSLevel& lv = m.levels[l];
    EXPECT_NEAR(lv.scale_in, scale, 1e-12);
    const Eigen::Index row = static_cast<Eigen::Index>(m.levels.size() - l);
    for (Eigen::Index j = 0; j < cur.cols(); ++j) {
      const double e = scale * (oracle::arc(cur.col(j), lv.axis.coords()) - lv.radius);
      EXPECT_NEAR(lv.residuals[static_cast<std::size_t>(j)], e, 1e-10);
      EXPECT_NEAR(m.coordinates(row, j), e, 1e-10);
    }
    const Matrix y = lv.rotation_to_pole * cur;
    Matrix next(cur.rows() - 1, cur.cols());
    for (Eigen::Index j = 0; j < cur.cols(); ++j) next.col(j) = y.col(j).head(cur.rows() - 1).normalized();
    cur = next;
    scale *= std::sin(lv.radius);
  }
  EXPECT_NEAR(m.final_scale, scale, 1e-12);
  for (Eigen::Index j = 0; j < cur.cols(); ++j) {
    const double ang = std::atan2(cur(1, j), cur(0, j));
    EXPECT_NEAR(m.coordinates(0, j), scale * wrap_angle(ang - m.final_mean_angle), 1e-10);
    EXPECT_LE(std::abs(m.coordinates(0, j)), m.cut_point());
  }
}

TEST(PnsDecompose, VarianceShares) {
  std::mt19937_64 rng(45);
  const PNSModel m = pns_decompose(cloud(rng, 4, 50, 0.3));
  const auto pct = variance_by_component(m);
  double sum = 0.0;
  for (double p : pct) sum += p;
  EXPECT_NEAR(sum, 100.0, 1e-9);
}

TEST(PnsDecompose, SmallCircleDataConcentratesInFirstComponent) {
  std::mt19937_64 rng(46);
  std::normal_distribution<double> arc(0.0, 0.6), radial(0.0, 0.03);
  Matrix pts(3, 300);
  for (int i = 0; i < 300; ++i) {
    const double r = 0.5 + radial(rng), phi = arc(rng);
    pts.col(i) = Eigen::Vector3d(std::sin(r) * std::cos(phi), std::sin(r) * std::sin(phi), std::cos(r));
  }
  EXPECT_GE(variance_by_component(pns_decompose(pts))[0], 60.0);
}

TEST(PnsReconstruct, RoundTripAndZeroCoordinates) {
  std::mt19937_64 rng(47);
  const Matrix x = cloud(rng, 6, 100, 0.6);
  const PNSModel m = pns_decompose(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    EXPECT_LT((pns_reconstruct(m, m.coordinates.col(j)).coords() - x.col(j)).norm(), 1e-8);

  // The zero point lies on every fitted subsphere.
  const SpherePoint mean = pns_reconstruct(m, Vector::Zero(5));
  EXPECT_NEAR(oracle::arc(mean.coords(), m.levels.front().axis.coords()), m.levels.front().radius, 1e-8);
}

TEST(PnsReconstruct, FirstCoordinateSweepStaysOnSubspheres) {
  std::mt19937_64 rng(48);
  const PNSModel m = pns_decompose(cloud(rng, 4, 40, 0.5));
  const PNSLevel& top = m.levels.front();
  for (int s = 0; s < 20; ++s) {
    Vector c = Vector::Zero(3);
    c[0] = m.cut_point() * (-0.95 + 1.9 * s / 19.0);
    const SpherePoint p = pns_reconstruct(m, c);
    EXPECT_NEAR(oracle::arc(p.coords(), top.axis.coords()), top.radius, 1e-8);
    // Wrapping E(0) by a full turn gives the same point.
    c[0] += 2 * m.cut_point();
    EXPECT_LT((pns_reconstruct(m, c).coords() - p.coords()).norm(), 1e-8);
  }
}

TEST(PnsReconstruct, RejectsBadCoordinates) {
  std::mt19937_64 rng(49);
  const PNSModel m = pns_decompose(cloud(rng, 4, 40, 0.5));
  EXPECT_THROW(pns_reconstruct(m, Vector::Zero(2)), DimensionError);
  Vector c = Vector::Zero(3);
  c[2] = 10.0;
  EXPECT_THROW(pns_reconstruct(m, c), RangeError);
  c[2] = std::nan("");
  EXPECT_THROW(pns_reconstruct(m, c), RangeError);
}

TEST(PnsProject, AgreesWithFittedCoordinates) {
  std::mt19937_64 rng(50);
  const Matrix x = cloud(rng, 5, 50, 0.4);
  const PNSModel m = pns_decompose(x);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    EXPECT_LT((pns_project(m, x.col(j)) - m.coordinates.col(j)).norm(), 1e-10);
}

TEST(PnsDecompose, RotationInvariance) {
  std::mt19937_64 rng(51);
  const Matrix x = cloud(rng, 4, 40, 0.5);
  const Matrix r = oracle::random_rotation(rng, 4);
  const PNSModel a = pns_decompose(x), b = pns_decompose(r * x);
  for (std::size_t l = 0; l < a.levels.size(); ++l) EXPECT_NEAR(a.levels[l].radius, b.levels[l].radius, 1e-8);
  const auto pa = variance_by_component(a), pb = variance_by_component(b);
  for (std::size_t j = 0; j < pa.size(); ++j) EXPECT_NEAR(pa[j], pb[j], 1e-8);
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index row = 1; row < a.coordinates.rows(); ++row)
      EXPECT_NEAR(a.coordinates(row, j), b.coordinates(row, j), 1e-8);
}

TEST(PnsDecompose, TooFewPoints) {
  std::mt19937_64 rng(52);
  EXPECT_THROW(pns_decompose(cloud(rng, 3, 3, 0.5)), UnderdeterminedError);
}
