#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "astf/bvh/skeleton.hpp"
#include "astf/numerics/mask.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::bvh {

// Per-joint feature block: 6D rotation, then on the root only the linear
// velocity (3) and the yaw rate (1). Non-root joints keep those four at zero.
inline constexpr std::size_t kFeatureChannels = 10;
inline constexpr std::size_t kRotationFeatures = 6;
inline constexpr std::size_t kVelocityFeature = 6;
inline constexpr std::size_t kYawRateFeature = 9;
inline constexpr std::size_t kDefaultClipLength = 200;
inline constexpr const char* kFeatureLayout = "rot6d+root_velocity3+root_yaw_rate1";

struct MotionClip {
    Tensor features;  // [d_m x L_m x J]
    FrameMask mask;
    std::shared_ptr<const Skeleton> skeleton;
    std::optional<std::string> style_label;
    std::optional<std::string> content_label;
    double frame_time = 1.0 / 60.0;
    Eigen::Vector3d root_origin = Eigen::Vector3d::Zero();
    std::string source;

    std::size_t channels() const { return features.dim(0); }
    std::size_t length() const { return features.dim(1); }
    std::size_t joints() const { return features.dim(2); }
    std::size_t valid_frames() const { return mask.valid_count(); }
    double feature(std::size_t c, std::size_t f, std::size_t j) const;

    // [L_m x J*d_m], column j*d_m + c.
    Tensor motion_matrix() const;
    Eigen::Matrix3d rotation(std::size_t frame, std::size_t joint) const;

    void validate() const;
};

// Builds a clip from the listed raw frames (already chosen by the caller),
// zero-padded to `length`.
MotionClip encode_clip(const RawMotion& m, const std::vector<std::size_t>& frames, std::size_t length);

// Replaces the features of `like` with a network output in motion-matrix layout.
MotionClip clip_from_matrix(const Tensor& matrix, const FrameMask& mask, const MotionClip& like);

// Back to Euler channels on the clip skeleton; only valid frames are emitted.
RawMotion decode_clip(const MotionClip& clip);

// Keep even frames, truncate or zero-pad to `length`.
MotionClip preprocess_xia(const RawMotion& m, std::size_t length = kDefaultClipLength);
// Non-overlapping windows of 2*length raw frames, each halved to `length`.
std::vector<MotionClip> preprocess_bfa(const RawMotion& m, std::size_t length = kDefaultClipLength);

double yaw_of(const Eigen::Matrix3d& r);
double wrap_angle(double radians);

void write_clip(const MotionClip& clip, std::ostream& out);
void write_clip(const MotionClip& clip, const std::filesystem::path& path);
MotionClip read_clip(std::istream& in);
MotionClip read_clip(const std::filesystem::path& path);

}  // namespace astf::bvh
