#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "astf/net/networks.hpp"

namespace astf::train {

struct TrainConfig {
    net::NetConfig net;  // `styles` is filled in from the dataset

    double lambda_mcr = 1.0;
    double lambda_r = 3.0;
    double lambda_c = 3.0;
    double lambda_a = 1.0;
    double lr_g = 1e-5;
    double lr_d = 1e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    std::size_t batch_size = 16;
    std::size_t iterations = 1000;
    std::uint64_t seed = 1;
    bool use_mcr_ss = true;
    bool use_mcr_sgn = true;
    bool use_style_align = true;
    double r1_gamma = 1.0;
    std::size_t crop_min = 0;  // 0 = clip_length / 8
    double grad_clip = 10.0;   // 0 disables
    std::size_t log_interval = 10;
    std::size_t checkpoint_interval = 0;  // 0 = only at the end

    std::size_t effective_crop_min() const { return crop_min ? crop_min : std::max<std::size_t>(1, net.clip_length / 8); }
    // Throws ContractError naming the offending key.
    void validate() const;
};

// Flat `key = value` text; '#' starts a comment. Keys absent from the text
// keep their defaults; unknown keys and malformed values raise ParseError.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::string& path);
// Every key with its current value, one per line, in a fixed order.
std::string dump_config(const TrainConfig& cfg);
std::vector<std::string> config_keys();
// Set one key from its text form (used for command-line overrides).
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

// Hash of every setting that shapes the model or the sequence of updates.
// Run-length settings (iterations, log and checkpoint intervals) are left out
// so a finished run can be extended.
std::uint64_t config_hash(const TrainConfig& cfg);

}  // namespace astf::train
