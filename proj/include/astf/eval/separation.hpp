#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "astf/bvh/clip.hpp"

namespace astf::eval {

struct SeparationOptions {
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    double l2 = 1e-2;
    std::size_t iterations = 500;
};

struct SeparationReport {
    std::vector<std::string> styles;
    std::size_t samples = 0;
    double accuracy_two = 0;    // descriptor (mu, var)
    double accuracy_four = 0;   // descriptor (mu, var, skew, kurt)
    double silhouette_two = 0;
    double silhouette_four = 0;
    Eigen::MatrixXd centroids;  // one row per style, four-moment descriptor
};

// Per-clip descriptor: per-channel (d, j) moments over the valid frames,
// grouped by statistic. Rows follow the clip order.
Eigen::MatrixXd clip_descriptors(const std::vector<bvh::MotionClip>& clips, bool four_moments);

// Stratified k-fold accuracy of a multinomial logistic probe on features
// standardised with each training fold's mean and deviation.
double cv_probe_accuracy(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels, std::size_t classes,
                         const SeparationOptions& opt = {});

// Mean silhouette over all samples, Euclidean distance. Singletons score 0.
double silhouette_score(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels);

// Needs style labels on every clip and at least two styles.
SeparationReport separation_report(const std::vector<bvh::MotionClip>& clips, const SeparationOptions& opt = {});

// stats-core CSV (one row per clip and channel) for external projection.
void write_descriptor_csv(std::ostream& out, const std::vector<bvh::MotionClip>& clips);

// Two styles whose channels share the same distribution of per-clip mean and
// scale; "symmetric" draws Gaussian frames, "skewed" draws centred
// exponential frames (skew 2, kurtosis 9). Features are not rotations.
std::vector<bvh::MotionClip> synthetic_skew_corpus(std::size_t per_style, std::size_t frames, std::size_t joints,
                                                   std::uint64_t seed);

}  // namespace astf::eval
