#include "astf/train/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "astf/error.hpp"
#include "astf/numerics/nn.hpp"

namespace astf::train {

using bvh::Channel;

bvh::Skeleton synthetic_skeleton(std::size_t joints) {
    if (joints == 0) throw ContractError("synthetic skeleton needs at least one joint");
    std::vector<bvh::Joint> js;
    bvh::Joint root;
    root.name = "Hips";
    root.channels = {Channel::Xposition, Channel::Yposition, Channel::Zposition,
                     Channel::Zrotation, Channel::Xrotation, Channel::Yrotation};
    js.push_back(root);
    for (std::size_t j = 1; j < joints; ++j) {
        bvh::Joint b;
        b.name = "Link" + std::to_string(j);
        b.parent = j - 1;
        b.offset = Eigen::Vector3d(j % 2 ? 2.0 : -2.0, 10.0, 0.0);
        b.channels = {Channel::Zrotation, Channel::Xrotation, Channel::Yrotation};
        if (j + 1 == joints) b.end_site = Eigen::Vector3d(0.0, 8.0, 0.0);
        js.push_back(b);
    }
    if (joints == 1) js[0].end_site = Eigen::Vector3d(0.0, 8.0, 0.0);
    return bvh::Skeleton(std::move(js));
}

std::string synthetic_style_name(std::size_t style) { return "style" + std::to_string(style); }
std::string synthetic_content_name(std::size_t content) { return "content" + std::to_string(content); }

bvh::RawMotion synthetic_motion(const SyntheticSpec& spec) {
    bvh::RawMotion m;
    m.skeleton = synthetic_skeleton(spec.joints);
    m.frame_time = spec.frame_time;
    m.frame_count = spec.frames;
    m.frames.assign(spec.frames * m.width(), 0.0);

    Rng rng = nn::param_rng(spec.seed, "synthetic/" + std::to_string(spec.style) + "/" + std::to_string(spec.content));
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    const double pi = std::numbers::pi;

    double freq = 0.6 + 0.45 * static_cast<double>(spec.content % 4);   // cycles per second
    double speed = 20.0 * static_cast<double>(spec.content % 3);         // units per second
    std::size_t swing_axis = spec.content % 2;                           // 0: Z, 1: X
    double amp = 18.0 + 14.0 * static_cast<double>(spec.style % 3);       // degrees
    double sharp = spec.style % 2 ? 0.6 : 0.0;                           // odd harmonic weight
    double lean = spec.style % 2 ? 12.0 : -4.0;                          // degrees about X
    double phase0 = 2.0 * pi * jitter(rng);
    double amp_scale = 1.0 + jitter(rng);

    std::vector<double> joint_phase(spec.joints);
    for (auto& p : joint_phase) p = jitter(rng) * pi;

    for (std::size_t f = 0; f < spec.frames; ++f) {
        double t = static_cast<double>(f) * spec.frame_time;
        double w = 2.0 * pi * freq * t + phase0;
        // root: forward travel with a style-dependent bounce
        m.at(f, 0) = 0.0;
        m.at(f, 1) = 90.0 + 2.0 * amp_scale * std::sin(2.0 * w) * (1.0 + sharp);
        m.at(f, 2) = speed * t;
        m.at(f, 3) = 0.25 * amp * std::sin(w);       // Z roll
        m.at(f, 4) = lean + 0.15 * amp * std::cos(w);  // X pitch
        m.at(f, 5) = 10.0 * std::sin(0.5 * w);         // Y yaw sway
        for (std::size_t j = 1; j < spec.joints; ++j) {
            double wj = w + joint_phase[j] + 0.4 * static_cast<double>(j);
            double wave = std::sin(wj) + sharp * std::sin(3.0 * wj) / 3.0;
            double a = amp * amp_scale * wave;
            std::size_t col = m.skeleton.channel_offset(j);
            m.at(f, col + 0) = swing_axis == 0 ? a : 0.3 * a;
            m.at(f, col + 1) = swing_axis == 1 ? a : 0.3 * a + 0.5 * lean;
            m.at(f, col + 2) = 5.0 * std::sin(0.5 * wj);
        }
    }
    return m;
}

std::vector<bvh::MotionClip> synthetic_corpus(std::size_t styles, std::size_t contents, std::size_t per_pair,
                                              std::size_t joints, std::size_t length, std::uint64_t seed) {
    std::vector<bvh::MotionClip> out;
    std::vector<std::size_t> frames(length);
    for (std::size_t f = 0; f < length; ++f) frames[f] = f;
    for (std::size_t s = 0; s < styles; ++s)
        for (std::size_t c = 0; c < contents; ++c)
            for (std::size_t k = 0; k < per_pair; ++k) {
                SyntheticSpec spec;
                spec.joints = joints;
                spec.frames = length;
                spec.style = s;
                spec.content = c;
                spec.seed = seed * 1000003ULL + k;
                bvh::MotionClip clip = bvh::encode_clip(synthetic_motion(spec), frames, length);
                clip.style_label = synthetic_style_name(s);
                clip.content_label = synthetic_content_name(c);
                clip.source = "synthetic/" + *clip.style_label + "_" + *clip.content_label + "_" + std::to_string(k);
                out.push_back(std::move(clip));
            }
    return out;
}

}  // namespace astf::train
