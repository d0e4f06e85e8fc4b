#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "astf/bvh/rotation.hpp"

namespace astf::bvh {

enum class Channel : unsigned char { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view tag);
bool is_rotation(Channel c);
Axis channel_axis(Channel c);

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

struct Joint {
    std::string name;
    std::size_t parent = kNoParent;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    std::vector<Channel> channels;
    std::optional<Eigen::Vector3d> end_site;

    bool operator==(const Joint&) const = default;
};

class Skeleton {
public:
    Skeleton() = default;
    explicit Skeleton(std::vector<Joint> joints);

    const std::vector<Joint>& joints() const { return joints_; }
    std::size_t size() const { return joints_.size(); }
    const Joint& operator[](std::size_t i) const { return joints_[i]; }

    std::size_t channel_count() const;
    // Column of the first channel of joint j in a frame row.
    std::size_t channel_offset(std::size_t j) const { return offsets_[j]; }
    std::optional<std::size_t> find(std::string_view name) const;
    std::vector<std::size_t> children(std::size_t j) const;

    // Channel order of the joint's rotation channels; ZXY when it has none.
    RotationOrder rotation_order(std::size_t j) const;
    bool has_position(std::size_t j) const;

    bool operator==(const Skeleton& other) const { return joints_ == other.joints_; }

private:
    std::vector<Joint> joints_;
    std::vector<std::size_t> offsets_;
};

// Frames are stored row-major, one row per frame.
struct RawMotion {
    Skeleton skeleton;
    double frame_time = 1.0 / 120.0;
    std::size_t frame_count = 0;
    std::vector<double> frames;

    std::size_t width() const { return skeleton.channel_count(); }
    double at(std::size_t frame, std::size_t column) const { return frames[frame * width() + column]; }
    double& at(std::size_t frame, std::size_t column) { return frames[frame * width() + column]; }

    // Local rotation (from Euler degrees) and root translation for one frame.
    Eigen::Matrix3d local_rotation(std::size_t frame, std::size_t joint) const;
    Eigen::Vector3d position(std::size_t frame, std::size_t joint) const;

    void validate() const;
};

// World-space joint positions for one frame.
std::vector<Eigen::Vector3d> forward_kinematics(const RawMotion& m, std::size_t frame);

RawMotion select_joints(const RawMotion& m, const std::vector<std::string>& names);

const std::vector<std::string>& default_joint_names();

}  // namespace astf::bvh
