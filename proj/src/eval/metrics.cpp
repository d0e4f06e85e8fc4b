#include "astf/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "astf/bvh/rotation.hpp"
#include "astf/error.hpp"

namespace astf::eval {

namespace {

void require_orthonormal(const Eigen::Matrix3d& r, const char* which) {
    double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(err <= kOrthonormalTol))
        throw ContractError(std::string("geodesic_distance: ") + which + " is not orthonormal (error " +
                            std::to_string(err) + ")");
}

// Symmetric PSD square root through the eigendecomposition.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double geodesic_distance(const Eigen::Matrix3d& r1, const Eigen::Matrix3d& r2) {
    require_orthonormal(r1, "R1");
    require_orthonormal(r2, "R2");
    // same angle as acos((tr - 1) / 2), but exact at 0 and well conditioned near it
    Eigen::Matrix3d r = r1.transpose() * r2;
    Eigen::Vector3d s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
    return std::atan2(std::min(s.norm() / 2.0, 1.0), c);
}

double mean_geodesic(const Tensor& a, const Tensor& b, const FrameMask& mask, std::size_t joints) {
    if (a.shape() != b.shape() || a.ndim() != 2 || a.dim(0) != mask.size() || joints == 0 ||
        a.dim(1) % joints != 0 || a.dim(1) / joints < 6)
        throw DimensionError("mean_geodesic: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    if (mask.valid_count() == 0) throw ContractError("mean_geodesic: no valid frames");
    std::size_t width = a.dim(1), d = width / joints;
    auto rot = [&](const Tensor& t, std::size_t f, std::size_t j) {
        std::array<double, 6> v;
        for (std::size_t c = 0; c < 6; ++c) v[c] = t.values()[f * width + j * d + c];
        return bvh::rotation_from_6d(v);
    };
    double total = 0;
    for (std::size_t f = 0; f < mask.size(); ++f) {
        if (!mask[f]) continue;
        for (std::size_t j = 0; j < joints; ++j) total += geodesic_distance(rot(a, f, j), rot(b, f, j));
    }
    return total / static_cast<double>(mask.valid_count() * joints);
}

FeatureDistribution FeatureDistribution::from_samples(const Eigen::MatrixXd& samples) {
    if (samples.rows() < 2) throw ContractError("a feature distribution needs at least 2 samples");
    FeatureDistribution d;
    d.count = static_cast<std::size_t>(samples.rows());
    d.mean = samples.colwise().mean().transpose();
    Eigen::MatrixXd centered = samples.rowwise() - d.mean.transpose();
    d.cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
    d.cov = 0.5 * (d.cov + d.cov.transpose());
    return d;
}

void FeatureDistribution::validate() const {
    if (count < 2) throw ContractError("feature distribution has fewer than 2 samples");
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw DimensionError("feature distribution covariance does not match its mean");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8) throw ContractError("covariance is not symmetric");
    if (cov.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.eigenvalues().minCoeff() < -1e-8) throw ContractError("covariance is not positive semidefinite");
    }
}

double frechet_distance(const FeatureDistribution& a, const FeatureDistribution& b) {
    if (a.dim() != b.dim())
        throw DimensionError("frechet_distance: dimensions " + std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()));
    double mean_term = (a.mean - b.mean).squaredNorm();
    // tr (S_a S_b)^(1/2) == tr (S_a^(1/2) S_b S_a^(1/2))^(1/2), and the latter is symmetric
    Eigen::MatrixXd ra = psd_sqrt(a.cov);
    Eigen::MatrixXd cross = psd_sqrt(ra * b.cov * ra);
    double d = mean_term + a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
    return std::max(d, 0.0);
}

double accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth) {
    if (predicted.size() != truth.size())
        throw DimensionError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                             std::to_string(truth.size()) + " labels");
    if (truth.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace astf::eval
