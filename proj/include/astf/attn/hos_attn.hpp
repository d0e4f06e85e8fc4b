#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "astf/numerics/mask.hpp"
#include "astf/numerics/nn.hpp"
#include "astf/numerics/tensor.hpp"
#include "astf/stats/moments.hpp"

namespace astf::attn {

using stats::Stat;
using stats::StatFlags;

// Refined statistics, indexed by Stat. Disabled statistics stay undefined.
struct RefinedStats {
    std::array<Tensor, 4> values;

    const Tensor& operator[](Stat s) const { return values[static_cast<std::size_t>(s)]; }
    Tensor& operator[](Stat s) { return values[static_cast<std::size_t>(s)]; }
};

// Cross-attention over the channels of one statistic group. Each scalar of
// s_Q, s_K and s_V is lifted to a `hidden`-wide token by its own projection;
// the attended tokens are projected back to one scalar per channel.
class StatCrossAttention {
public:
    struct Result {
        Tensor output;   // [1 x d], same shape as s_Q
        Tensor weights;  // [d x d]
        Tensor context;  // [d x hidden], attended value tokens before the output projection
    };

    StatCrossAttention() = default;
    StatCrossAttention(std::size_t hidden, const std::string& name, std::uint64_t seed);

    Result attend(const Tensor& s_q, const Tensor& s_k, const Tensor& s_v) const;
    Tensor forward(const std::array<Tensor, 3>& group) const;
    void collect(nn::ParamSet& params) const;

    const nn::Linear& query() const { return q_; }
    const nn::Linear& key() const { return k_; }
    const nn::Linear& value() const { return v_; }
    const nn::Linear& out() const { return out_; }

private:
    std::size_t hidden_ = 0;
    nn::Linear q_, k_, v_, out_;
};

// Self-attention over [Q | broadcast refined stats]; the statistic columns are
// dropped from the output, leaving a tensor shaped like Q.
class GateSelfAttention {
public:
    GateSelfAttention() = default;
    GateSelfAttention(std::size_t width, std::vector<Stat> stats, std::size_t heads, const std::string& name,
                      std::uint64_t seed);

    Tensor augment(const Tensor& q, const RefinedStats& refined, const FrameMask& mask) const;
    Tensor forward(const Tensor& q, const RefinedStats& refined, const FrameMask& mask,
                   std::vector<Tensor>* weights = nullptr) const;
    void collect(nn::ParamSet& params) const;

    std::size_t width() const { return width_; }
    std::size_t augmented_width() const { return width_ * (1 + stats_.size()); }
    const std::vector<Stat>& stats() const { return stats_; }

    // [aug x width], [aug x width], [aug x aug], [aug x aug]
    Tensor& w_query() { return wq_; }
    Tensor& w_key() { return wk_; }
    Tensor& w_value() { return wv_; }
    Tensor& w_out() { return wo_; }

private:
    std::string name_;
    std::size_t width_ = 0;
    std::size_t heads_ = 1;
    std::vector<Stat> stats_;
    Tensor wq_, wk_, wv_, wo_;
};

// (cos(Q, K) + 1) / 2 over the flattened tensors, as a scalar tensor.
Tensor cosine_gate(const Tensor& q, const Tensor& k, double eps = 1e-8);
// gate * f_c + (1 - gate) * q
Tensor gate_residual(const Tensor& f_c, const Tensor& q, const Tensor& gate);
Tensor gate_residual(const Tensor& f_c, const Tensor& q, double gate);

struct HosConfig {
    std::size_t width = 64;        // width of Q
    std::size_t latent = 64;       // width of e_T
    std::size_t ffn_hidden = 128;
    std::size_t stat_hidden = 16;
    std::size_t heads = 1;
    StatFlags flags;
};

struct HosOutput {
    Tensor e_t;
    Tensor f_c;
    Tensor f_o;
    Tensor gate;
    RefinedStats refined;
};

class HosAttn {
public:
    HosAttn() = default;
    HosAttn(const HosConfig& config, const std::string& name, std::uint64_t seed);

    // q, k: [F x width] from the SDM (equal shapes); the gate is computed
    // from them unless `forced_gate` is given.
    HosOutput forward(const Tensor& q, const Tensor& k, const stats::StatGroups& groups, const FrameMask& q_mask,
                      std::optional<double> forced_gate = std::nullopt) const;
    void collect(nn::ParamSet& params) const;

    const HosConfig& config() const { return config_; }
    const StatCrossAttention* cross(Stat s) const;
    GateSelfAttention& gate_attention() { return gate_attn_; }
    const nn::FeedForward& ffn() const { return ffn_; }

private:
    HosConfig config_;
    std::array<std::optional<StatCrossAttention>, 4> cross_;
    GateSelfAttention gate_attn_;
    nn::FeedForward ffn_;
};

}  // namespace astf::attn
