#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "astf/numerics/mask.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::eval {

inline constexpr double kOrthonormalTol = 1e-6;

// Rotation angle of R1^T R2, in [0, pi]. Both inputs must be orthonormal.
double geodesic_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2);

// Mean geodesic distance over the valid frames and all joints of two
// motions in network layout [L x J*d_m]; rotations are read from the 6D
// block at the start of each joint.
double mean_geodesic(const Tensor& a, const Tensor& b, const FrameMask& mask, std::size_t joints);

struct FeatureDistribution {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // unbiased
    std::size_t count = 0;

    // rows = samples
    static FeatureDistribution from_samples(const Eigen::MatrixXd& samples);
    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
    // Throws unless the covariance is symmetric PSD within 1e-8 and count >= 2.
    void validate() const;
};

// |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)), clamped at 0.
double frechet_distance(const FeatureDistribution& a, const FeatureDistribution& b);

// Fraction of positions where predicted == truth; 0 for empty input.
double accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth);

}  // namespace astf::eval
