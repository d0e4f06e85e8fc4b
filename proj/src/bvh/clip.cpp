#include "astf/bvh/clip.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "astf/error.hpp"

namespace astf::bvh {

static_assert(std::endian::native == std::endian::little, "clip cache assumes a little-endian host");

namespace {

std::size_t fidx(std::size_t c, std::size_t f, std::size_t j, std::size_t length, std::size_t joints) {
    return (c * length + f) * joints + j;
}

}  // namespace

double wrap_angle(double radians) {
    double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(radians + std::numbers::pi, two_pi);
    if (r < 0) r += two_pi;
    return r - std::numbers::pi;
}

double yaw_of(const Eigen::Matrix3d& r) { return std::atan2(r(0, 2), r(2, 2)); }

double MotionClip::feature(std::size_t c, std::size_t f, std::size_t j) const {
    return features.values()[fidx(c, f, j, length(), joints())];
}

Tensor MotionClip::motion_matrix() const {
    std::size_t d = channels(), L = length(), J = joints();
    std::vector<double> out(L * J * d);
    auto src = features.values();
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t f = 0; f < L; ++f)
            for (std::size_t j = 0; j < J; ++j) out[f * J * d + j * d + c] = src[fidx(c, f, j, L, J)];
    return Tensor({L, J * d}, std::move(out));
}

Eigen::Matrix3d MotionClip::rotation(std::size_t frame, std::size_t joint) const {
    std::array<double, 6> v{};
    for (std::size_t c = 0; c < kRotationFeatures; ++c) v[c] = feature(c, frame, joint);
    return rotation_from_6d(v);
}

void MotionClip::validate() const {
    if (!features.defined() || features.ndim() != 3) throw DataError("clip features must be [d_m x L x J]");
    if (mask.size() != length()) throw DataError("clip mask length does not match features");
    if (!mask.is_prefix()) throw DataError("clip mask must be a contiguous prefix");
    if (skeleton && skeleton->size() != joints()) throw DataError("clip skeleton does not match joint count");
    for (std::size_t c = 0; c < channels(); ++c)
        for (std::size_t f = mask.valid_count(); f < length(); ++f)
            for (std::size_t j = 0; j < joints(); ++j)
                if (feature(c, f, j) != 0.0) throw DataError("clip features are non-zero on masked frames");
}

MotionClip encode_clip(const RawMotion& m, const std::vector<std::size_t>& frames, std::size_t length) {
    m.validate();
    if (length == 0) throw ContractError("clip length must be positive");
    const Skeleton& sk = m.skeleton;
    std::size_t J = sk.size();
    std::size_t valid = std::min(frames.size(), length);
    std::vector<double> feat(kFeatureChannels * length * J, 0.0);
    auto put = [&](std::size_t c, std::size_t f, std::size_t j, double v) { feat[fidx(c, f, j, length, J)] = v; };

    MotionClip clip;
    Eigen::Vector3d previous_pos = Eigen::Vector3d::Zero();
    double previous_yaw = 0.0;
    for (std::size_t f = 0; f < valid; ++f) {
        std::size_t raw = frames[f];
        if (raw >= m.frame_count) throw ContractError("frame index out of range");
        for (std::size_t j = 0; j < J; ++j) {
            auto six = rotation_to_6d(m.local_rotation(raw, j));
            for (std::size_t c = 0; c < kRotationFeatures; ++c) put(c, f, j, six[c]);
        }
        Eigen::Vector3d pos = sk.has_position(0) ? m.position(raw, 0) : Eigen::Vector3d::Zero();
        double yaw = yaw_of(m.local_rotation(raw, 0));
        if (f == 0) {
            clip.root_origin = pos;
        } else {
            Eigen::Vector3d v = pos - previous_pos;
            for (int k = 0; k < 3; ++k) put(kVelocityFeature + static_cast<std::size_t>(k), f, 0, v[k]);
            put(kYawRateFeature, f, 0, wrap_angle(yaw - previous_yaw));
        }
        previous_pos = pos;
        previous_yaw = yaw;
    }
    clip.features = Tensor({kFeatureChannels, length, J}, std::move(feat));
    clip.mask = FrameMask::prefix(valid, length);
    clip.skeleton = std::make_shared<const Skeleton>(sk);
    clip.frame_time = m.frame_time;
    return clip;
}

MotionClip clip_from_matrix(const Tensor& matrix, const FrameMask& mask, const MotionClip& like) {
    std::size_t d = like.channels(), L = like.length(), J = like.joints();
    if (matrix.ndim() != 2 || matrix.dim(0) != L || matrix.dim(1) != J * d)
        throw DimensionError("motion matrix " + shape_str(matrix.shape()) + " does not match clip layout");
    if (mask.size() != L) throw DimensionError("mask length does not match clip length");
    std::vector<double> feat(d * L * J, 0.0);
    auto src = matrix.values();
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t f = 0; f < L; ++f)
            if (mask[f])
                for (std::size_t j = 0; j < J; ++j) feat[fidx(c, f, j, L, J)] = src[f * J * d + j * d + c];
    MotionClip out = like;
    out.features = Tensor({d, L, J}, std::move(feat));
    out.mask = mask;
    return out;
}

RawMotion decode_clip(const MotionClip& clip) {
    if (!clip.skeleton) throw ContractError("clip has no skeleton");
    const Skeleton& sk = *clip.skeleton;
    std::size_t frames = clip.valid_frames();
    if (frames == 0) throw DataError("clip has no valid frames");
    RawMotion m;
    m.skeleton = sk;
    m.frame_time = clip.frame_time;
    m.frame_count = frames;
    std::size_t width = sk.channel_count();
    m.frames.assign(frames * width, 0.0);
    Eigen::Vector3d root = clip.root_origin;
    for (std::size_t f = 0; f < frames; ++f) {
        if (f > 0)
            for (int k = 0; k < 3; ++k) root[k] += clip.feature(kVelocityFeature + static_cast<std::size_t>(k), f, 0);
        for (std::size_t j = 0; j < sk.size(); ++j) {
            const Joint& joint = sk[j];
            Eigen::Vector3d angles = rotmat_to_euler(clip.rotation(f, j), sk.rotation_order(j));
            Eigen::Vector3d pos = j == 0 ? root : joint.offset;
            std::size_t col = sk.channel_offset(j);
            std::size_t r = 0;
            for (std::size_t c = 0; c < joint.channels.size(); ++c) {
                Channel ch = joint.channels[c];
                double v = is_rotation(ch) ? angles[static_cast<Eigen::Index>(r++)]
                                           : pos[static_cast<int>(channel_axis(ch))];
                m.frames[f * width + col + c] = v;
            }
        }
    }
    return m;
}

MotionClip preprocess_xia(const RawMotion& m, std::size_t length) {
    m.validate();
    std::vector<std::size_t> frames;
    for (std::size_t f = 0; f < m.frame_count && frames.size() < length; f += 2) frames.push_back(f);
    MotionClip clip = encode_clip(m, frames, length);
    clip.frame_time = 2.0 * m.frame_time;
    return clip;
}

std::vector<MotionClip> preprocess_bfa(const RawMotion& m, std::size_t length) {
    m.validate();
    std::size_t window = 2 * length;
    std::vector<MotionClip> clips;
    for (std::size_t start = 0; start + window <= m.frame_count; start += window) {
        std::vector<std::size_t> frames;
        for (std::size_t f = start; f < start + window; f += 2) frames.push_back(f);
        MotionClip clip = encode_clip(m, frames, length);
        clip.frame_time = 2.0 * m.frame_time;
        clips.push_back(std::move(clip));
    }
    return clips;
}

// Cache layout, all little-endian:
//   "ASTFCLIP" u32 version u32 d_m u32 L_m u32 J
//   u8 mask[L_m]  f64 features[d_m*L_m*J]
//   label style, label content   (u8 present, u32 length, bytes)
//   f64 frame_time  f64 root_origin[3]  string source  string feature layout
//   u32 joint count, per joint: string name, u32 parent (0xffffffff = root),
//     f64 offset[3], u8 channel count, u8 channels[], u8 has_end, f64 end[3]

namespace {

constexpr char kMagic[8] = {'A', 'S', 'T', 'F', 'C', 'L', 'I', 'P'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kRootParent = 0xffffffffu;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_label(std::ostream& out, const std::optional<std::string>& s) {
    put<std::uint8_t>(out, s ? 1 : 0);
    if (s) put_string(out, *s);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError("clip cache truncated");
    return v;
}

std::string get_string(std::istream& in) {
    auto n = get<std::uint32_t>(in);
    if (n > (1u << 20)) throw DataError("clip cache string too long");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("clip cache truncated");
    return s;
}

std::optional<std::string> get_label(std::istream& in) {
    if (get<std::uint8_t>(in) == 0) return std::nullopt;
    return get_string(in);
}

}  // namespace

void write_clip(const MotionClip& clip, std::ostream& out) {
    clip.validate();
    if (!clip.skeleton) throw ContractError("clip has no skeleton");
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.channels()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.length()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(clip.joints()));
    for (std::uint8_t b : clip.mask.raw()) put<std::uint8_t>(out, b ? 1 : 0);
    auto values = clip.features.values();
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    put_label(out, clip.style_label);
    put_label(out, clip.content_label);
    put<double>(out, clip.frame_time);
    for (int k = 0; k < 3; ++k) put<double>(out, clip.root_origin[k]);
    put_string(out, clip.source);
    put_string(out, kFeatureLayout);
    const Skeleton& sk = *clip.skeleton;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(sk.size()));
    for (const Joint& j : sk.joints()) {
        put_string(out, j.name);
        put<std::uint32_t>(out, j.parent == kNoParent ? kRootParent : static_cast<std::uint32_t>(j.parent));
        for (int k = 0; k < 3; ++k) put<double>(out, j.offset[k]);
        put<std::uint8_t>(out, static_cast<std::uint8_t>(j.channels.size()));
        for (Channel c : j.channels) put<std::uint8_t>(out, static_cast<std::uint8_t>(c));
        put<std::uint8_t>(out, j.end_site ? 1 : 0);
        Eigen::Vector3d e = j.end_site.value_or(Eigen::Vector3d::Zero());
        for (int k = 0; k < 3; ++k) put<double>(out, e[k]);
    }
    if (!out) throw DataError("failed writing clip cache");
}

void write_clip(const MotionClip& clip, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    write_clip(clip, out);
}

MotionClip read_clip(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("not a clip cache file");
    if (get<std::uint32_t>(in) != kVersion) throw DataError("unsupported clip cache version");
    std::size_t d = get<std::uint32_t>(in);
    std::size_t L = get<std::uint32_t>(in);
    std::size_t J = get<std::uint32_t>(in);
    if (d != kFeatureChannels || L == 0 || J == 0 || L > (1u << 20) || J > 4096)
        throw DataError("clip cache has an unexpected layout");
    std::vector<std::uint8_t> mask(L);
    for (auto& b : mask) b = get<std::uint8_t>(in);
    std::vector<double> feat(d * L * J);
    in.read(reinterpret_cast<char*>(feat.data()), static_cast<std::streamsize>(feat.size() * sizeof(double)));
    if (!in) throw DataError("clip cache truncated");

    MotionClip clip;
    clip.features = Tensor({d, L, J}, std::move(feat));
    clip.mask = FrameMask(std::move(mask));
    clip.style_label = get_label(in);
    clip.content_label = get_label(in);
    clip.frame_time = get<double>(in);
    for (int k = 0; k < 3; ++k) clip.root_origin[k] = get<double>(in);
    clip.source = get_string(in);
    if (get_string(in) != kFeatureLayout) throw DataError("clip cache uses a different feature layout");
    std::size_t n = get<std::uint32_t>(in);
    std::vector<Joint> joints(n);
    for (Joint& j : joints) {
        j.name = get_string(in);
        auto parent = get<std::uint32_t>(in);
        j.parent = parent == kRootParent ? kNoParent : parent;
        for (int k = 0; k < 3; ++k) j.offset[k] = get<double>(in);
        std::size_t channels = get<std::uint8_t>(in);
        for (std::size_t c = 0; c < channels; ++c) {
            auto tag = get<std::uint8_t>(in);
            if (tag > 5) throw DataError("clip cache has a bad channel tag");
            j.channels.push_back(static_cast<Channel>(tag));
        }
        bool has_end = get<std::uint8_t>(in) != 0;
        Eigen::Vector3d e;
        for (int k = 0; k < 3; ++k) e[k] = get<double>(in);
        if (has_end) j.end_site = e;
    }
    clip.skeleton = std::make_shared<const Skeleton>(std::move(joints));
    clip.validate();
    return clip;
}

MotionClip read_clip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_clip(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace astf::bvh
