#include "astf/bvh/skeleton.hpp"

#include <array>
#include <unordered_set>

#include "astf/error.hpp"

namespace astf::bvh {

namespace {
constexpr std::array<std::string_view, 6> kChannelNames{"Xposition", "Yposition", "Zposition",
                                                        "Xrotation", "Yrotation", "Zrotation"};
}

std::string_view channel_name(Channel c) { return kChannelNames[static_cast<std::size_t>(c)]; }

std::optional<Channel> parse_channel(std::string_view tag) {
    for (std::size_t i = 0; i < kChannelNames.size(); ++i)
        if (kChannelNames[i] == tag) return static_cast<Channel>(i);
    return std::nullopt;
}

bool is_rotation(Channel c) { return static_cast<int>(c) >= 3; }

Axis channel_axis(Channel c) { return static_cast<Axis>(static_cast<int>(c) % 3); }

Skeleton::Skeleton(std::vector<Joint> joints) : joints_(std::move(joints)) {
    if (joints_.empty()) throw DataError("skeleton has no joints");
    std::size_t column = 0;
    std::unordered_set<std::string> names;
    for (std::size_t j = 0; j < joints_.size(); ++j) {
        const Joint& joint = joints_[j];
        if (j == 0 && joint.parent != kNoParent) throw DataError("first joint must be the root");
        if (j > 0 && (joint.parent == kNoParent || joint.parent >= j))
            throw DataError("joint '" + joint.name + "' must have a parent listed before it");
        std::size_t n = joint.channels.size();
        if (n != 0 && n != 3 && n != 6)
            throw DataError("joint '" + joint.name + "' has " + std::to_string(n) + " channels");
        std::size_t rotations = 0;
        for (Channel c : joint.channels) rotations += is_rotation(c) ? 1 : 0;
        if (rotations != 0 && rotations != 3)
            throw DataError("joint '" + joint.name + "' needs three rotation channels");
        if (!names.insert(joint.name).second) throw DataError("duplicate joint name '" + joint.name + "'");
        offsets_.push_back(column);
        column += n;
    }
    offsets_.push_back(column);
}

std::size_t Skeleton::channel_count() const { return offsets_.empty() ? 0 : offsets_.back(); }

std::optional<std::size_t> Skeleton::find(std::string_view name) const {
    for (std::size_t j = 0; j < joints_.size(); ++j)
        if (joints_[j].name == name) return j;
    return std::nullopt;
}

std::vector<std::size_t> Skeleton::children(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t k = j + 1; k < joints_.size(); ++k)
        if (joints_[k].parent == j) out.push_back(k);
    return out;
}

RotationOrder Skeleton::rotation_order(std::size_t j) const {
    RotationOrder order = kOrderZXY;
    std::size_t n = 0;
    for (Channel c : joints_[j].channels)
        if (is_rotation(c)) order[n++] = channel_axis(c);
    return n == 3 ? order : kOrderZXY;
}

bool Skeleton::has_position(std::size_t j) const {
    for (Channel c : joints_[j].channels)
        if (!is_rotation(c)) return true;
    return false;
}

Eigen::Matrix3d RawMotion::local_rotation(std::size_t frame, std::size_t joint) const {
    const Joint& jt = skeleton[joint];
    Eigen::Vector3d angles = Eigen::Vector3d::Zero();
    std::size_t col = skeleton.channel_offset(joint);
    std::size_t n = 0;
    for (std::size_t c = 0; c < jt.channels.size(); ++c)
        if (is_rotation(jt.channels[c])) angles[static_cast<Eigen::Index>(n++)] = at(frame, col + c);
    if (n == 0) return Eigen::Matrix3d::Identity();
    return euler_to_rotmat(angles, skeleton.rotation_order(joint));
}

Eigen::Vector3d RawMotion::position(std::size_t frame, std::size_t joint) const {
    const Joint& jt = skeleton[joint];
    if (!skeleton.has_position(joint)) return jt.offset;
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    std::size_t col = skeleton.channel_offset(joint);
    for (std::size_t c = 0; c < jt.channels.size(); ++c)
        if (!is_rotation(jt.channels[c]))
            p[static_cast<int>(channel_axis(jt.channels[c]))] = at(frame, col + c);
    return p;
}

void RawMotion::validate() const {
    if (frame_count == 0) throw DataError("motion has no frames");
    if (!(frame_time > 0.0)) throw DataError("frame time must be positive");
    if (frames.size() != frame_count * width()) throw DataError("frame matrix size does not match skeleton");
}

std::vector<Eigen::Vector3d> forward_kinematics(const RawMotion& m, std::size_t frame) {
    const Skeleton& sk = m.skeleton;
    std::vector<Eigen::Vector3d> pos(sk.size());
    std::vector<Eigen::Matrix3d> rot(sk.size());
    for (std::size_t j = 0; j < sk.size(); ++j) {
        Eigen::Matrix3d local = m.local_rotation(frame, j);
        Eigen::Vector3d t = m.position(frame, j);
        if (sk[j].parent == kNoParent) {
            pos[j] = t;
            rot[j] = local;
        } else {
            std::size_t p = sk[j].parent;
            pos[j] = pos[p] + rot[p] * t;
            rot[j] = rot[p] * local;
        }
    }
    return pos;
}

RawMotion select_joints(const RawMotion& m, const std::vector<std::string>& names) {
    const Skeleton& sk = m.skeleton;
    std::vector<bool> keep(sk.size(), false);
    for (const auto& name : names) {
        auto j = sk.find(name);
        if (!j) throw DataError("unknown joint '" + name + "'");
        keep[*j] = true;
    }

    std::vector<std::size_t> new_index(sk.size(), kNoParent);
    std::vector<Joint> joints;
    std::vector<std::size_t> source;
    for (std::size_t j = 0; j < sk.size(); ++j) {
        if (!keep[j]) continue;
        Joint joint = sk[j];
        Eigen::Vector3d offset = joint.offset;
        std::size_t p = joint.parent;
        while (p != kNoParent && !keep[p]) {
            offset += sk[p].offset;
            p = sk[p].parent;
        }
        if (p == kNoParent && !joints.empty())
            throw DataError("selection disconnects the hierarchy at '" + joint.name + "'");
        joint.parent = p == kNoParent ? kNoParent : new_index[p];
        joint.offset = offset;
        new_index[j] = joints.size();
        joints.push_back(std::move(joint));
        source.push_back(j);
    }
    if (joints.empty()) throw DataError("no joints selected");

    RawMotion out;
    out.skeleton = Skeleton(std::move(joints));
    out.frame_time = m.frame_time;
    out.frame_count = m.frame_count;
    std::size_t width = out.skeleton.channel_count();
    out.frames.resize(out.frame_count * width);
    for (std::size_t f = 0; f < m.frame_count; ++f) {
        for (std::size_t k = 0; k < source.size(); ++k) {
            std::size_t src = sk.channel_offset(source[k]);
            std::size_t dst = out.skeleton.channel_offset(k);
            for (std::size_t c = 0; c < sk[source[k]].channels.size(); ++c)
                out.frames[f * width + dst + c] = m.at(f, src + c);
        }
    }
    return out;
}

const std::vector<std::string>& default_joint_names() {
    static const std::vector<std::string> names{
        "Hips",         "LeftUpLeg", "LeftLeg",     "LeftFoot",      "LeftToeBase", "RightUpLeg", "RightLeg",
        "RightFoot",    "RightToeBase", "Spine",    "Spine1",        "Neck",        "Head",       "LeftShoulder",
        "LeftArm",      "LeftForeArm", "LeftHand",  "RightShoulder", "RightArm",    "RightForeArm", "RightHand"};
    return names;
}

}  // namespace astf::bvh
