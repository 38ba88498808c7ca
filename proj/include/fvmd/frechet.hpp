#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "fvmd/motion_features.hpp"

namespace fvmd {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // symmetric, unbiased (n - 1) estimate
  std::size_t count = 0;
};

struct FvmdScore {
  double value = 0.0;
  int dim = 0;
  std::size_t n_gen = 0;
  std::size_t n_ref = 0;
  double eps = 0.0;
  // How much negative mass the final clamp removed; ~0 on sane inputs.
  double clamp_removed = 0.0;
};

inline constexpr double kDefaultEps = 1e-6;

GaussianStats fit_gaussian(const std::vector<MotionFeature>& features);

// Symmetric PSD square root via eigendecomposition; negative eigenvalues are
// clamped to zero.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

// |mu_a - mu_b|^2 + tr(A + B - 2 sqrtm(A^1/2 B A^1/2)) with A = cov_a + eps I
// and B = cov_b + eps I, clamped to [0, inf). The symmetric inner form keeps
// the product's square root real.
FvmdScore frechet_distance(const GaussianStats& a, const GaussianStats& b,
                           double eps = kDefaultEps);

FvmdScore fvmd(const std::vector<MotionFeature>& gen_features,
               const std::vector<MotionFeature>& ref_features,
               double eps = kDefaultEps);

}  // namespace fvmd
