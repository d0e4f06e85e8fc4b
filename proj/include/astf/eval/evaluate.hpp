#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "astf/bvh/clip.hpp"
#include "astf/eval/probe.hpp"
#include "astf/train/trainer.hpp"

namespace astf::eval {

struct EvalOptions {
    ProbeConfig probe;
};

// Content metrics are absent when the clips carry fewer than two content labels.
struct EvalResult {
    std::optional<double> style_fid, content_fid, style_acc, content_acc;
    double geo_dis = 0;
    std::size_t transfers = 0;
};

// Clip i is stylised by the next clip (cyclically) with a different style
// label. Probes are trained on the real clips, then score the transfers.
EvalResult evaluate(const train::LoadedModel& model, const std::vector<bvh::MotionClip>& clips,
                    const EvalOptions& opt = {});

std::string metrics_json(const EvalResult& r);
void write_metrics_json(const std::filesystem::path& path, const EvalResult& r);

}  // namespace astf::eval
