#include "fvmd/frechet.hpp"

#include <cmath>
#include <string>

#include "fvmd/errors.hpp"

namespace fvmd {

GaussianStats fit_gaussian(const std::vector<MotionFeature>& features) {
  const std::size_t n = features.size();
  if (n < 2) {
    throw TooFewSamples("need at least 2 feature rows, have " + std::to_string(n));
  }
  const std::size_t d = features.front().data.size();
  for (const auto& f : features) {
    if (f.data.size() != d) throw DimensionMismatch("feature rows differ in length");
    if (f.fields != features.front().fields || f.hist != features.front().hist) {
      throw KindError("feature rows differ in kind");
    }
  }

  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(features[i].data[j]);
    }
  }

  GaussianStats g;
  g.count = n;
  g.mean = x.colwise().mean();
  x.rowwise() -= g.mean.transpose();
  g.cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d),
                                static_cast<Eigen::Index>(d));
  g.cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(),
                                                   1.0 / static_cast<double>(n - 1));
  // mirror the computed triangle so the matrix is symmetric by construction
  for (Eigen::Index i = 0; i < g.cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) g.cov(j, i) = g.cov(i, j);
  }
  return g;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw NotSymmetric("matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw NotSymmetric("asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

FvmdScore frechet_distance(const GaussianStats& a, const GaussianStats& b,
                           double eps) {
  if (a.mean.size() != b.mean.size()) {
    throw DimensionMismatch("feature dimensions differ: " +
                            std::to_string(a.mean.size()) + " vs " +
                            std::to_string(b.mean.size()));
  }
  const Eigen::Index d = a.mean.size();
  Eigen::MatrixXd ca = a.cov;
  Eigen::MatrixXd cb = b.cov;
  ca.diagonal().array() += eps;
  cb.diagonal().array() += eps;

  const Eigen::MatrixXd ra = sqrtm_psd(ca);
  Eigen::MatrixXd inner = ra * cb * ra;
  inner = 0.5 * (inner + inner.transpose().eval());
  const Eigen::MatrixXd s = sqrtm_psd(inner);

  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = ca.trace() + cb.trace() - 2.0 * s.trace();
  const double raw = mean_term + trace_term;

  FvmdScore score;
  score.dim = static_cast<int>(d);
  score.n_gen = a.count;
  score.n_ref = b.count;
  score.eps = eps;
  score.value = raw < 0.0 ? 0.0 : raw;
  score.clamp_removed = raw < 0.0 ? -raw : 0.0;
  return score;
}

FvmdScore fvmd(const std::vector<MotionFeature>& gen_features,
               const std::vector<MotionFeature>& ref_features, double eps) {
  if (!gen_features.empty() && !ref_features.empty()) {
    if (gen_features.front().data.size() != ref_features.front().data.size()) {
      throw DimensionMismatch(
          "feature dimensions differ: " +
          std::to_string(gen_features.front().data.size()) + " vs " +
          std::to_string(ref_features.front().data.size()));
    }
    if (gen_features.front().fields != ref_features.front().fields ||
        gen_features.front().hist != ref_features.front().hist) {
      throw KindError("feature kinds differ between the two sets");
    }
  }
  const GaussianStats g = fit_gaussian(gen_features);
  const GaussianStats r = fit_gaussian(ref_features);
  return frechet_distance(g, r, eps);
}

}  // namespace fvmd
