#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "astf/numerics/mask.hpp"
#include "astf/numerics/tensor.hpp"

// Layers shared by every network. Sequence tensors are frame-major:
// [frames x channels], one row per frame.
namespace astf::nn {

inline constexpr double kLeakySlope = 0.2;

std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 1469598103934665603ULL);

// Ordered collection of named parameter tensors. Handles share storage with
// the owning module.
class ParamSet {
public:
    void add(std::string name, Tensor tensor);
    void append(const ParamSet& other);

    const std::vector<std::pair<std::string, Tensor>>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    // Total number of scalar parameters.
    std::size_t scalar_count() const;
    const Tensor* find(std::string_view name) const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
};

// Parameter initialisation keyed on (seed, name), so a tensor's initial value
// does not depend on how many other parameters were created before it.
Rng param_rng(std::uint64_t seed, std::string_view name);

class Linear {
public:
    enum class Init { Xavier, Zero };

    Linear() = default;
    Linear(std::size_t in, std::size_t out, std::string name, std::uint64_t seed,
           Init init = Init::Xavier);

    // x: [N x in] -> [N x out]
    Tensor forward(const Tensor& x) const;
    void collect(ParamSet& params) const;

    std::size_t in_features() const { return weight_.dim(0); }
    std::size_t out_features() const { return weight_.dim(1); }
    const Tensor& weight() const { return weight_; }
    const Tensor& bias() const { return bias_; }

private:
    std::string name_;
    Tensor weight_;  // [in x out]
    Tensor bias_;    // [out]
};

// Normalises each row over its channels.
class LayerNorm {
public:
    LayerNorm() = default;
    LayerNorm(std::size_t width, std::string name, double eps = 1e-5);

    Tensor forward(const Tensor& x) const;
    void collect(ParamSet& params) const;

private:
    std::string name_;
    Tensor gain_;
    Tensor shift_;
    double eps_ = 1e-5;
};

// Per-channel normalisation over the valid frames of x: [F x C]. Masked
// frames come out as zero; zero-variance channels map to zero.
Tensor instance_normalize(const Tensor& x, const FrameMask& mask, double eps);
Tensor instance_normalize(const Tensor& x, double eps);

// Scaled dot-product attention over frames, heads split across columns.
// q: [Fq x dk], k: [Fk x dk], v: [Fk x dv]; key_bias: [1 x Fk] or undefined.
// When `weights` is given it receives the per-head attention matrices.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& key_bias,
                 std::size_t heads, std::vector<Tensor>* weights = nullptr);

// Sinusoidal positional encoding, [frames x width].
Tensor positional_encoding(std::size_t frames, std::size_t width);

class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(std::size_t width, std::size_t heads, const std::string& name,
                       std::uint64_t seed);

    Tensor forward(const Tensor& query, const Tensor& context, const FrameMask& context_mask) const;
    void collect(ParamSet& params) const;

private:
    std::size_t heads_ = 1;
    Linear q_, k_, v_, o_;
};

class FeedForward {
public:
    FeedForward() = default;
    FeedForward(std::size_t in, std::size_t hidden, std::size_t out, const std::string& name,
                std::uint64_t seed);

    Tensor forward(const Tensor& x) const;
    void collect(ParamSet& params) const;

private:
    Linear up_, down_;
};

// Pre-norm transformer block with mask-aware self-attention.
class TransformerBlock {
public:
    TransformerBlock() = default;
    TransformerBlock(std::size_t width, std::size_t hidden, std::size_t heads,
                     const std::string& name, std::uint64_t seed);

    Tensor forward(const Tensor& x, const FrameMask& mask) const;
    void collect(ParamSet& params) const;

private:
    LayerNorm norm1_, norm2_;
    MultiHeadAttention attn_;
    FeedForward ff_;
};

}  // namespace astf::nn
