#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "astf/bvh/clip.hpp"
#include "astf/net/checkpoint.hpp"
#include "astf/net/networks.hpp"
#include "astf/numerics/optim.hpp"
#include "astf/train/config.hpp"

namespace astf::train {

struct Sample {
    net::Motion motion;
    std::size_t style = 0;
    std::size_t content = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> styles;
    std::vector<std::string> contents;
};

net::Motion to_motion(const bvh::MotionClip& clip);
// Labels are mapped to indices in sorted order. Every clip needs a style
// label and all clips must share length and joint count.
Dataset make_dataset(const std::vector<bvh::MotionClip>& clips);

struct LossReport {
    double adv_g = 0, adv_d = 0, r1 = 0, ss = 0, sgn = 0, recon = 0, cyc_c = 0, cyc_s = 0, align = 0;
    double total_g = 0, total_d = 0;
    std::size_t ss_skipped = 0;  // samples whose style clip was too short to crop
};

std::string loss_log_header();
std::string loss_log_row(std::size_t iteration, const LossReport& r);

// (content index, style index) into the dataset.
using Batch = std::vector<std::pair<std::size_t, std::size_t>>;

// Loss terms of one half-step, kept as tensors so tests can audit gradients.
struct DLosses {
    Tensor adv, r1, ss, sgn, total;
    std::size_t ss_skipped = 0;
};
struct GLosses {
    Tensor adv, recon, cyc_c, cyc_s, align, total;
};

class Trainer {
public:
    Trainer(TrainConfig cfg, std::shared_ptr<const Dataset> data);

    // One D update then one G update, drawing the batch and crops from the
    // iteration's own generator so results do not depend on history.
    LossReport step();
    LossReport step(const Batch& batch, Rng& rng);

    Batch sample_batch(Rng& rng) const;
    DLosses d_losses(const Batch& batch, Rng& rng) const;
    GLosses g_losses(const Batch& batch) const;

    std::size_t iteration() const { return iteration_; }
    const TrainConfig& config() const { return cfg_; }
    const Dataset& data() const { return *data_; }
    net::Generator& generator() { return g_; }
    net::Discriminator& discriminator() { return d_; }
    const std::string& log_text() const { return log_; }

    net::Checkpoint checkpoint() const;
    void restore(const net::Checkpoint& ck, bool force = false);

    static Rng iteration_rng(std::uint64_t seed, std::size_t iteration);

private:
    TrainConfig cfg_;
    std::shared_ptr<const Dataset> data_;
    net::Generator g_;
    net::Discriminator d_;
    Adam opt_g_, opt_d_;
    std::size_t iteration_ = 0;
    std::string log_;
};

struct TrainOptions {
    std::optional<std::filesystem::path> log_path;
    std::optional<std::filesystem::path> checkpoint_path;
    std::function<void(std::size_t, const LossReport&)> on_step;
};

// Runs until cfg.iterations steps have been taken in total. The log is
// rewritten at every logging interval; checkpoints at checkpoint_interval
// and at the end.
void train(Trainer& trainer, const TrainOptions& options);

// A generator rebuilt from a checkpoint, for transfer and evaluation.
struct LoadedModel {
    TrainConfig config;
    std::vector<std::string> styles;
    std::vector<std::string> contents;
    std::unique_ptr<net::Generator> generator;
};
LoadedModel load_model(const net::Checkpoint& ck);

}  // namespace astf::train
