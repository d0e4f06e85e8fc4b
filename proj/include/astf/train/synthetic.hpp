#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "astf/bvh/clip.hpp"
#include "astf/bvh/skeleton.hpp"

// Procedural labelled motion for desk-scale experiments. Content sets the
// gait (frequency, travel speed, which axis swings); style sets the manner
// (amplitude, waveform sharpness, posture lean).
namespace astf::train {

struct SyntheticSpec {
    std::size_t joints = 5;
    std::size_t frames = 128;  // raw frames, before any preprocessing
    std::size_t style = 0;
    std::size_t content = 0;
    std::uint64_t seed = 1;
    double frame_time = 1.0 / 60.0;
};

// A chain skeleton: a 6-channel root followed by 3-channel ZXY joints.
bvh::Skeleton synthetic_skeleton(std::size_t joints);
bvh::RawMotion synthetic_motion(const SyntheticSpec& spec);

std::string synthetic_style_name(std::size_t style);
std::string synthetic_content_name(std::size_t content);

// `per_pair` clips of every (style, content) pair, each `length` frames long
// and fully valid, labelled with the names above.
std::vector<bvh::MotionClip> synthetic_corpus(std::size_t styles, std::size_t contents, std::size_t per_pair,
                                              std::size_t joints, std::size_t length, std::uint64_t seed);

}  // namespace astf::train
