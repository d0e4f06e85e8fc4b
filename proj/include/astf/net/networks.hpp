#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "astf/attn/hos_attn.hpp"
#include "astf/numerics/mask.hpp"
#include "astf/numerics/nn.hpp"
#include "astf/numerics/tensor.hpp"
#include "astf/stats/moments.hpp"

namespace astf::net {

struct NetConfig {
    std::size_t joints = 21;
    std::size_t clip_length = 200;
    std::size_t feature_channels = 10;
    std::size_t latent = 64;
    std::size_t ffn_hidden = 128;
    std::size_t encoder_blocks = 2;
    std::size_t decoder_blocks = 2;
    std::size_t heads = 1;
    std::size_t stat_hidden = 16;
    std::size_t d0_blocks = 3;
    std::size_t d0_width = 64;
    std::size_t mcr_hidden = 64;
    std::size_t styles = 2;
    bool use_simple_sdm = true;
    bool use_skew = true;
    bool use_kurt = true;
    std::uint64_t seed = 1;

    std::size_t motion_width() const { return joints * feature_channels; }
    stats::StatFlags stat_flags() const { return {use_skew, use_kurt}; }
};

// A motion in network layout: [L x J*d_m] plus its valid frames.
struct Motion {
    Tensor values;
    FrameMask mask;
};

class Encoder {
public:
    Encoder() = default;
    Encoder(const NetConfig& cfg, const std::string& name);

    // [L x J*d_m] -> [L x d_z]; rows outside the mask are zero.
    Tensor forward(const Tensor& motion, const FrameMask& mask) const;
    void collect(nn::ParamSet& params) const;

private:
    bool simple_sdm_ = true;
    stats::StatFlags flags_;
    nn::Linear in1_, in2_, fuse_;
    std::vector<nn::TransformerBlock> blocks_;
    nn::LayerNorm norm_;
};

// Per joint: normalise the first 3 values, orthogonalise the next 3 against
// them; the remaining root channels are kept on joint 0 and zeroed elsewhere.
// motion: [L x J*d_m].
Tensor orthonormalize_rotations(const Tensor& motion, std::size_t joints, std::size_t channels);

class Decoder {
public:
    Decoder() = default;
    Decoder(const NetConfig& cfg, const std::string& name);

    Tensor forward(const Tensor& latent, const FrameMask& mask) const;
    void collect(nn::ParamSet& params) const;

private:
    std::size_t joints_ = 0, channels_ = 0;
    std::vector<nn::TransformerBlock> blocks_;
    nn::LayerNorm norm_;
    nn::Linear out_;
};

struct GenOutput {
    Tensor m_g;  // [L x J*d_m], masked like the content
    Tensor e_c;
    Tensor e_s;
    Tensor e_t;
    Tensor q;
    Tensor k;
    Tensor gate;
};

class Generator {
public:
    Generator() = default;
    explicit Generator(const NetConfig& cfg);

    GenOutput generate(const Motion& content, const Motion& style, std::optional<double> forced_gate = {}) const;
    Tensor encode_content(const Motion& m) const { return content_enc_.forward(m.values, m.mask); }
    Tensor encode_style(const Motion& m) const { return style_enc_.forward(m.values, m.mask); }
    void collect(nn::ParamSet& params) const;
    nn::ParamSet parameters() const;

    const NetConfig& config() const { return cfg_; }
    attn::HosAttn& hos() { return hos_; }

private:
    NetConfig cfg_;
    Encoder content_enc_, style_enc_;
    stats::Sdm sdm_;
    attn::HosAttn hos_;
    Decoder dec_;
};

// Temporal convolution (kernel 3, zero padding) over frames.
class TemporalConv {
public:
    TemporalConv() = default;
    TemporalConv(std::size_t in, std::size_t out, const std::string& name, std::uint64_t seed);

    Tensor forward(const Tensor& x) const;
    void collect(nn::ParamSet& params) const;

private:
    nn::Linear linear_;
};

struct DiscOutput {
    Tensor z;       // [L x d0_width]
    Tensor logits;  // [1 x styles]
};

class Discriminator {
public:
    Discriminator() = default;
    explicit Discriminator(const NetConfig& cfg);

    Tensor features(const Motion& m) const;                      // D_0
    Tensor classify(const Tensor& z, const FrameMask& mask) const;  // D_1
    DiscOutput discriminate(const Motion& m) const;
    Tensor mcr_refine(const Tensor& z, const FrameMask& mask) const;

    void collect(nn::ParamSet& params) const;
    nn::ParamSet parameters() const;
    const NetConfig& config() const { return cfg_; }

private:
    NetConfig cfg_;
    std::vector<TemporalConv> d0_;
    nn::Linear head1_, head2_;
    nn::Linear mcr1_, mcr2_;
};

struct CropPair {
    Motion s1;
    Motion s2;
    std::size_t start1 = 0;
    std::size_t start2 = 0;
    std::size_t length = 0;
};

// Two disjoint windows of the valid region, s1 before s2, each re-padded to
// the clip length. Window length is uniform in [crop_min, crop_max] where
// crop_max defaults to valid/2. Returns nothing when the clip is too short.
std::optional<CropPair> random_crop_pair(const Motion& m, Rng& rng, std::size_t crop_min,
                                         std::size_t crop_max = 0);

}  // namespace astf::net
