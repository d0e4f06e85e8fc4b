#include "astf/net/networks.hpp"

#include <random>

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"

namespace astf::net {

namespace {

constexpr double kNormEps = 1e-8;

void check_motion(const Tensor& motion, const FrameMask& mask, std::size_t width, const char* who) {
    if (motion.ndim() != 2 || motion.dim(1) != width || motion.dim(0) != mask.size())
        throw DimensionError(std::string(who) + ": motion " + shape_str(motion.shape()) + " does not match width " +
                             std::to_string(width) + " and mask length " + std::to_string(mask.size()));
    if (mask.valid_count() == 0) throw ContractError(std::string(who) + ": all frames are masked");
}

Tensor row_normalize(const Tensor& x) {
    Tensor n = sqrt(clamp_min(sum(square(x), 1, true), kNormEps * kNormEps));
    return div(x, n);
}

}  // namespace

Encoder::Encoder(const NetConfig& cfg, const std::string& name)
    : simple_sdm_(cfg.use_simple_sdm),
      flags_(cfg.stat_flags()),
      in1_(cfg.motion_width(), cfg.latent, name + ".in1", cfg.seed),
      in2_(cfg.latent, cfg.latent, name + ".in2", cfg.seed),
      norm_(cfg.latent, name + ".norm") {
    if (simple_sdm_) fuse_ = nn::Linear(cfg.latent * (1 + flags_.count()), cfg.latent, name + ".fuse", cfg.seed);
    for (std::size_t b = 0; b < cfg.encoder_blocks; ++b)
        blocks_.emplace_back(cfg.latent, cfg.ffn_hidden, cfg.heads, name + ".block" + std::to_string(b), cfg.seed);
}

Tensor Encoder::forward(const Tensor& motion, const FrameMask& mask) const {
    check_motion(motion, mask, in1_.in_features(), "encoder");
    Tensor m = mask.column();
    Tensor e = in2_.forward(leaky_relu(in1_.forward(mul(motion, m)), nn::kLeakySlope));
    if (simple_sdm_) e = fuse_.forward(stats::simple_sdm(e, mask, flags_));
    Tensor h = add(e, nn::positional_encoding(e.dim(0), e.dim(1)));
    for (const auto& block : blocks_) h = block.forward(h, mask);
    return mul(norm_.forward(h), m);
}

void Encoder::collect(nn::ParamSet& params) const {
    in1_.collect(params);
    in2_.collect(params);
    if (simple_sdm_) fuse_.collect(params);
    for (const auto& block : blocks_) block.collect(params);
    norm_.collect(params);
}

Tensor orthonormalize_rotations(const Tensor& motion, std::size_t joints, std::size_t channels) {
    if (motion.ndim() != 2 || channels < 6 || motion.dim(1) != joints * channels)
        throw DimensionError("orthonormalize_rotations: " + shape_str(motion.shape()) + " is not [L x " +
                             std::to_string(joints) + "*" + std::to_string(channels) + "]");
    std::size_t frames = motion.dim(0);
    Tensor r = reshape(motion, {frames * joints, channels});
    Tensor e1 = row_normalize(slice(r, 1, 0, 3));
    Tensor b = slice(r, 1, 3, 6);
    Tensor e2 = row_normalize(sub(b, mul(sum(mul(e1, b), 1, true), e1)));
    std::vector<Tensor> parts{e1, e2};
    if (channels > 6) {
        std::vector<double> root(frames * joints, 0.0);
        for (std::size_t f = 0; f < frames; ++f) root[f * joints] = 1.0;
        parts.push_back(mul(slice(r, 1, 6, channels), Tensor({frames * joints, 1}, std::move(root))));
    }
    return reshape(concat(parts, 1), {frames, joints * channels});
}

Decoder::Decoder(const NetConfig& cfg, const std::string& name)
    : joints_(cfg.joints),
      channels_(cfg.feature_channels),
      norm_(cfg.latent, name + ".norm"),
      out_(cfg.latent, cfg.motion_width(), name + ".out", cfg.seed) {
    for (std::size_t b = 0; b < cfg.decoder_blocks; ++b)
        blocks_.emplace_back(cfg.latent, cfg.ffn_hidden, cfg.heads, name + ".block" + std::to_string(b), cfg.seed);
}

Tensor Decoder::forward(const Tensor& latent, const FrameMask& mask) const {
    check_motion(latent, mask, out_.in_features(), "decoder");
    Tensor h = add(latent, nn::positional_encoding(latent.dim(0), latent.dim(1)));
    for (const auto& block : blocks_) h = block.forward(h, mask);
    Tensor raw = out_.forward(norm_.forward(h));
    return mul(orthonormalize_rotations(raw, joints_, channels_), mask.column());
}

void Decoder::collect(nn::ParamSet& params) const {
    for (const auto& block : blocks_) block.collect(params);
    norm_.collect(params);
    out_.collect(params);
}

Generator::Generator(const NetConfig& cfg)
    : cfg_(cfg),
      content_enc_(cfg, "G.content_encoder"),
      style_enc_(cfg, "G.style_encoder"),
      sdm_(cfg.latent, "G.sdm", cfg.seed),
      dec_(cfg, "G.decoder") {
    attn::HosConfig hc;
    hc.width = cfg.latent;
    hc.latent = cfg.latent;
    hc.ffn_hidden = cfg.ffn_hidden;
    hc.stat_hidden = cfg.stat_hidden;
    hc.heads = cfg.heads;
    hc.flags = cfg.stat_flags();
    hos_ = attn::HosAttn(hc, "G.hos", cfg.seed);
}

GenOutput Generator::generate(const Motion& content, const Motion& style, std::optional<double> forced_gate) const {
    if (content.values.shape() != style.values.shape())
        throw DimensionError("generate: content " + shape_str(content.values.shape()) + " and style " +
                             shape_str(style.values.shape()) + " differ");
    GenOutput out;
    out.e_c = encode_content(content);
    out.e_s = encode_style(style);
    stats::SdmOutput s = sdm_.forward(out.e_s, style.mask, out.e_c, content.mask);
    attn::HosOutput h = hos_.forward(s.q, s.k, s.groups, content.mask, forced_gate);
    out.q = s.q;
    out.k = s.k;
    out.gate = h.gate;
    out.e_t = h.e_t;
    out.m_g = dec_.forward(h.e_t, content.mask);
    return out;
}

void Generator::collect(nn::ParamSet& params) const {
    content_enc_.collect(params);
    style_enc_.collect(params);
    sdm_.collect(params);
    hos_.collect(params);
    dec_.collect(params);
}

nn::ParamSet Generator::parameters() const {
    nn::ParamSet p;
    collect(p);
    return p;
}

TemporalConv::TemporalConv(std::size_t in, std::size_t out, const std::string& name, std::uint64_t seed)
    : linear_(3 * in, out, name, seed) {}

Tensor TemporalConv::forward(const Tensor& x) const {
    std::size_t frames = x.dim(0), width = x.dim(1);
    Tensor zero = Tensor::zeros({1, width});
    Tensor prev = frames > 1 ? concat({zero, slice(x, 0, 0, frames - 1)}, 0) : zero;
    Tensor next = frames > 1 ? concat({slice(x, 0, 1, frames), zero}, 0) : zero;
    return linear_.forward(concat({prev, x, next}, 1));
}

void TemporalConv::collect(nn::ParamSet& params) const { linear_.collect(params); }

Discriminator::Discriminator(const NetConfig& cfg)
    : cfg_(cfg),
      head1_(cfg.d0_width, cfg.d0_width, "D.head1", cfg.seed),
      head2_(cfg.d0_width, cfg.styles, "D.head2", cfg.seed),
      mcr1_(cfg.d0_width * (1 + cfg.stat_flags().count()), cfg.mcr_hidden, "D.mcr1", cfg.seed),
      mcr2_(cfg.mcr_hidden, cfg.d0_width, "D.mcr2", cfg.seed) {
    if (cfg.d0_blocks == 0) throw ContractError("discriminator needs at least one feature block");
    for (std::size_t b = 0; b < cfg.d0_blocks; ++b)
        d0_.emplace_back(b == 0 ? cfg.motion_width() : cfg.d0_width, cfg.d0_width, "D.d0.conv" + std::to_string(b),
                         cfg.seed);
}

Tensor Discriminator::features(const Motion& m) const {
    check_motion(m.values, m.mask, cfg_.motion_width(), "discriminator");
    Tensor mask = m.mask.column();
    Tensor h = mul(m.values, mask);
    for (const auto& conv : d0_) h = mul(leaky_relu(conv.forward(h), nn::kLeakySlope), mask);
    return h;
}

Tensor Discriminator::classify(const Tensor& z, const FrameMask& mask) const {
    Tensor pooled = mul(sum(mul(z, mask.column()), 0, true), 1.0 / static_cast<double>(mask.valid_count()));
    return head2_.forward(leaky_relu(head1_.forward(pooled), nn::kLeakySlope));
}

DiscOutput Discriminator::discriminate(const Motion& m) const {
    DiscOutput out;
    out.z = features(m);
    out.logits = classify(out.z, m.mask);
    return out;
}

Tensor Discriminator::mcr_refine(const Tensor& z, const FrameMask& mask) const {
    Tensor aug = stats::simple_sdm(z, mask, cfg_.stat_flags());
    return mul(mcr2_.forward(leaky_relu(mcr1_.forward(aug), nn::kLeakySlope)), mask.column());
}

void Discriminator::collect(nn::ParamSet& params) const {
    for (const auto& conv : d0_) conv.collect(params);
    head1_.collect(params);
    head2_.collect(params);
    mcr1_.collect(params);
    mcr2_.collect(params);
}

nn::ParamSet Discriminator::parameters() const {
    nn::ParamSet p;
    collect(p);
    return p;
}

std::optional<CropPair> random_crop_pair(const Motion& m, Rng& rng, std::size_t crop_min, std::size_t crop_max) {
    if (!m.mask.is_prefix()) throw ContractError("random_crop_pair: mask must be a prefix");
    std::size_t valid = m.mask.valid_count();
    std::size_t length = m.mask.size();
    crop_min = std::max<std::size_t>(crop_min, 1);
    std::size_t upper = valid / 2;
    if (crop_max != 0) upper = std::min(upper, crop_max);
    if (upper < crop_min) return std::nullopt;

    CropPair out;
    out.length = std::uniform_int_distribution<std::size_t>(crop_min, upper)(rng);
    std::size_t l = out.length;
    out.start1 = std::uniform_int_distribution<std::size_t>(0, valid - 2 * l)(rng);
    out.start2 = std::uniform_int_distribution<std::size_t>(out.start1 + l, valid - l)(rng);
    auto window = [&](std::size_t start) {
        Tensor part = slice(m.values, 0, start, start + l);
        if (l < length) part = concat({part, Tensor::zeros({length - l, m.values.dim(1)})}, 0);
        return Motion{part, FrameMask::prefix(l, length)};
    };
    out.s1 = window(out.start1);
    out.s2 = window(out.start2);
    return out;
}

}  // namespace astf::net
