#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fvmd/errors.hpp"
#include "fvmd/frechet.hpp"
#include "fvmd/rng.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using fvmd::FeatureFields;
using fvmd::GaussianStats;
using fvmd::HistKind;
using fvmd::MotionFeature;

namespace {

MotionFeature feat(std::initializer_list<float> values,
                   FeatureFields fields = FeatureFields::combined) {
  MotionFeature f;
  f.fields = fields;
  f.hist = HistKind::h1d;
  f.data = values;
  return f;
}

// Closed form for diagonal covariances, with the same regularizer the
// implementation applies.
double diag_oracle(const VectorXd& mu_a, const VectorXd& da,
                   const VectorXd& mu_b, const VectorXd& db, double eps) {
  double d = (mu_a - mu_b).squaredNorm();
  for (int i = 0; i < da.size(); ++i) {
    const double sa = std::sqrt(da[i] + eps);
    const double sb = std::sqrt(db[i] + eps);
    d += (sa - sb) * (sa - sb);
  }
  return d;
}

GaussianStats stats(const VectorXd& mu, const MatrixXd& cov) {
  GaussianStats g;
  g.mean = mu;
  g.cov = cov;
  g.count = 100;
  return g;
}

}  // namespace

TEST_CASE("fit_gaussian matches hand arithmetic") {
  const auto g = fvmd::fit_gaussian({feat({0, 0}), feat({2, 0})});
  REQUIRE(g.mean.size() == 2);
  CHECK(g.mean[0] == doctest::Approx(1.0));
  CHECK(g.mean[1] == doctest::Approx(0.0));
  CHECK(g.cov(0, 0) == doctest::Approx(2.0));
  CHECK(g.cov(0, 1) == 0.0);
  CHECK(g.cov(1, 0) == 0.0);
  CHECK(g.cov(1, 1) == 0.0);
  CHECK(g.count == 2);
}

TEST_CASE("identical samples give a zero covariance") {
  const auto g = fvmd::fit_gaussian({feat({1, 2, 3}), feat({1, 2, 3}), feat({1, 2, 3})});
  CHECK(g.cov.norm() == 0.0);
}

TEST_CASE("fit_gaussian input validation") {
  CHECK_THROWS_AS(fvmd::fit_gaussian({}), fvmd::TooFewSamples);
  CHECK_THROWS_AS(fvmd::fit_gaussian({feat({1, 2})}), fvmd::TooFewSamples);
  CHECK_THROWS_AS(fvmd::fit_gaussian({feat({1, 2}), feat({1, 2, 3})}),
                  fvmd::DimensionMismatch);
  CHECK_THROWS_AS(
      fvmd::fit_gaussian({feat({1, 2}), feat({1, 2}, FeatureFields::velocity)}),
      fvmd::KindError);
}

TEST_CASE("fit_gaussian covariance is symmetric on random data") {
  fvmd::Rng rng(17);
  std::vector<MotionFeature> fs(20);
  for (auto& f : fs) {
    f.data.resize(12);
    for (auto& v : f.data) v = static_cast<float>(rng.uniform(-3, 3));
  }
  const auto g = fvmd::fit_gaussian(fs);
  CHECK((g.cov - g.cov.transpose()).norm() == 0.0);
}

TEST_CASE("sqrtm_psd of identity and diagonal matrices") {
  CHECK(fvmd::sqrtm_psd(MatrixXd::Identity(5, 5)).isApprox(MatrixXd::Identity(5, 5), 1e-12));
  MatrixXd d = MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const MatrixXd r = fvmd::sqrtm_psd(d);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(r(0, 1)) < 1e-12);
}

TEST_CASE("sqrtm_psd reconstructs random PSD matrices") {
  fvmd::Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 16;
    MatrixXd b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
    }
    const MatrixXd m = b * b.transpose();
    const MatrixXd r = fvmd::sqrtm_psd(m);
    CHECK((r * r - m).norm() / m.norm() < 1e-10);
    CHECK((r - r.transpose()).norm() < 1e-10 * r.norm());
  }
}

TEST_CASE("sqrtm_psd rejects asymmetric input") {
  MatrixXd m = MatrixXd::Identity(3, 3);
  m(0, 2) = 0.5;
  CHECK_THROWS_AS(fvmd::sqrtm_psd(m), fvmd::NotSymmetric);
}

TEST_CASE("frechet distance of a gaussian with itself is zero") {
  fvmd::Rng rng(31);
  MatrixXd b(8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) b(i, j) = rng.normal();
  }
  const MatrixXd cov = b * b.transpose();
  VectorXd mu(8);
  for (int i = 0; i < 8; ++i) mu[i] = rng.uniform(-2, 2);
  const auto s = fvmd::frechet_distance(stats(mu, cov), stats(mu, cov));
  CHECK(s.value >= 0.0);
  CHECK(s.value <= 1e-6);
}

TEST_CASE("unit-variance mean shift gives exactly one") {
  VectorXd mu_a(1), mu_b(1);
  mu_a << 0;
  mu_b << 1;
  const MatrixXd one = MatrixXd::Identity(1, 1);
  const auto s = fvmd::frechet_distance(stats(mu_a, one), stats(mu_b, one));
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("diagonal covariances match the scalar oracle") {
  fvmd::Rng rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(15));
    VectorXd mu_a(d), mu_b(d), da(d), db(d);
    for (int i = 0; i < d; ++i) {
      mu_a[i] = rng.uniform(-5, 5);
      mu_b[i] = rng.uniform(-5, 5);
      da[i] = rng.uniform(0.05, 4.0);
      db[i] = rng.uniform(0.05, 4.0);
    }
    const auto s = fvmd::frechet_distance(stats(mu_a, da.asDiagonal()),
                                          stats(mu_b, db.asDiagonal()));
    const double want = diag_oracle(mu_a, da, mu_b, db, s.eps);
    CHECK(std::abs(s.value - want) <= 1e-8 * std::max(1.0, want));
  }
}

TEST_CASE("frechet distance is symmetric on full covariances") {
  fvmd::Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 32;
    MatrixXd ba(n, n), bb(n, n);
    VectorXd mu_a(n), mu_b(n);
    for (int i = 0; i < n; ++i) {
      mu_a[i] = rng.uniform(-1, 1);
      mu_b[i] = rng.uniform(-1, 1);
      for (int j = 0; j < n; ++j) {
        ba(i, j) = rng.normal();
        bb(i, j) = rng.normal();
      }
    }
    const auto a = stats(mu_a, ba * ba.transpose());
    const auto b = stats(mu_b, bb * bb.transpose());
    const double dab = fvmd::frechet_distance(a, b).value;
    const double dba = fvmd::frechet_distance(b, a).value;
    CHECK(std::abs(dab - dba) <= 1e-6 * std::max(1.0, std::abs(dab)));
  }
}

TEST_CASE("fvmd wrapper validates and scores feature lists") {
  fvmd::Rng rng(43);
  std::vector<MotionFeature> xs(16);
  for (auto& f : xs) {
    f.data.resize(8);
    for (auto& v : f.data) v = static_cast<float>(rng.uniform(0, 10));
  }
  const auto self = fvmd::fvmd(xs, xs);
  CHECK(self.value <= 1e-6);
  CHECK(self.dim == 8);
  CHECK(self.n_gen == 16);
  CHECK(self.n_ref == 16);

  std::vector<MotionFeature> vel(16);
  for (auto& f : vel) {
    f.fields = FeatureFields::velocity;
    f.data.resize(4);
  }
  CHECK_THROWS_AS(fvmd::fvmd(xs, vel), fvmd::DimensionMismatch);
}
