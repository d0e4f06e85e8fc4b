#include "astf/numerics/nn.hpp"

#include <cmath>

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"

namespace astf::nn {

std::uint64_t fnv1a(std::string_view text, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

void ParamSet::add(std::string name, Tensor tensor) {
    entries_.emplace_back(std::move(name), std::move(tensor));
}

void ParamSet::append(const ParamSet& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) n += t.numel();
    return n;
}

const Tensor* ParamSet::find(std::string_view name) const {
    for (const auto& [n, t] : entries_) {
        if (n == name) return &t;
    }
    return nullptr;
}

void ParamSet::zero_grad() {
    for (auto& [name, t] : entries_) t.zero_grad();
}

Rng param_rng(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

Linear::Linear(std::size_t in, std::size_t out, std::string name, std::uint64_t seed, Init init)
    : name_(std::move(name)) {
    if (init == Init::Zero) {
        weight_ = Tensor::zeros({in, out});
    } else {
        Rng rng = param_rng(seed, name_ + ".weight");
        double a = std::sqrt(6.0 / static_cast<double>(in + out));
        weight_ = Tensor::uniform({in, out}, rng, -a, a);
    }
    bias_ = Tensor::zeros({out});
    weight_.set_requires_grad();
    bias_.set_requires_grad();
}

Tensor Linear::forward(const Tensor& x) const { return add(matmul(x, weight_), bias_); }

void Linear::collect(ParamSet& params) const {
    params.add(name_ + ".weight", weight_);
    params.add(name_ + ".bias", bias_);
}

LayerNorm::LayerNorm(std::size_t width, std::string name, double eps)
    : name_(std::move(name)), gain_(Tensor::ones({width})), shift_(Tensor::zeros({width})), eps_(eps) {
    gain_.set_requires_grad();
    shift_.set_requires_grad();
}

Tensor LayerNorm::forward(const Tensor& x) const {
    std::size_t axis = x.ndim() - 1;
    Tensor centered = sub(x, mean(x, axis, true));
    Tensor var = mean(square(centered), axis, true);
    Tensor normed = div(centered, sqrt(add(var, eps_)));
    return add(mul(normed, gain_), shift_);
}

void LayerNorm::collect(ParamSet& params) const {
    params.add(name_ + ".gain", gain_);
    params.add(name_ + ".shift", shift_);
}

Tensor instance_normalize(const Tensor& x, const FrameMask& mask, double eps) {
    if (x.ndim() != 2 || x.dim(0) != mask.size()) {
        throw DimensionError("instance_normalize: features " + shape_str(x.shape()) +
                             " do not match mask of length " + std::to_string(mask.size()));
    }
    std::size_t n = mask.valid_count();
    if (n == 0) throw ContractError("instance_normalize: no valid frames");
    Tensor m = mask.column();
    double inv = 1.0 / static_cast<double>(n);
    Tensor mu = mul(sum(mul(x, m), 0, true), inv);
    Tensor centered = mul(sub(x, mu), m);
    Tensor var = mul(sum(square(centered), 0, true), inv);
    return div(centered, sqrt(add(var, eps)));
}

Tensor instance_normalize(const Tensor& x, double eps) {
    return instance_normalize(x, FrameMask::all(x.dim(0)), eps);
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& key_bias,
                 std::size_t heads, std::vector<Tensor>* weights) {
    if (q.ndim() != 2 || k.ndim() != 2 || v.ndim() != 2 || q.dim(1) != k.dim(1) ||
        k.dim(0) != v.dim(0)) {
        throw DimensionError("attention: incompatible q " + shape_str(q.shape()) + ", k " +
                             shape_str(k.shape()) + ", v " + shape_str(v.shape()));
    }
    std::size_t dk = q.dim(1);
    std::size_t dv = v.dim(1);
    if (heads == 0 || dk % heads || dv % heads) {
        throw DimensionError("attention: widths " + std::to_string(dk) + "/" + std::to_string(dv) +
                             " not divisible by " + std::to_string(heads) + " heads");
    }
    std::size_t hk = dk / heads;
    std::size_t hv = dv / heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(hk));
    std::vector<Tensor> outs;
    for (std::size_t h = 0; h < heads; ++h) {
        Tensor qh = slice(q, 1, h * hk, (h + 1) * hk);
        Tensor kh = slice(k, 1, h * hk, (h + 1) * hk);
        Tensor vh = slice(v, 1, h * hv, (h + 1) * hv);
        Tensor scores = mul(matmul(qh, kh, false, true), scale);
        if (key_bias.defined()) scores = add(scores, key_bias);
        Tensor w = softmax(scores, 1);
        if (weights) weights->push_back(w);
        outs.push_back(matmul(w, vh));
    }
    return concat(outs, 1);
}

Tensor positional_encoding(std::size_t frames, std::size_t width) {
    std::vector<double> pe(frames * width);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t i = 0; i < width; ++i) {
            double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
            double angle = static_cast<double>(f) * rate;
            pe[f * width + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return Tensor({frames, width}, std::move(pe));
}

MultiHeadAttention::MultiHeadAttention(std::size_t width, std::size_t heads, const std::string& name,
                                       std::uint64_t seed)
    : heads_(heads),
      q_(width, width, name + ".q", seed),
      k_(width, width, name + ".k", seed),
      v_(width, width, name + ".v", seed),
      o_(width, width, name + ".o", seed) {}

Tensor MultiHeadAttention::forward(const Tensor& query, const Tensor& context,
                                   const FrameMask& context_mask) const {
    Tensor out = attention(q_.forward(query), k_.forward(context), v_.forward(context),
                           context_mask.key_bias(), heads_);
    return o_.forward(out);
}

void MultiHeadAttention::collect(ParamSet& params) const {
    q_.collect(params);
    k_.collect(params);
    v_.collect(params);
    o_.collect(params);
}

FeedForward::FeedForward(std::size_t in, std::size_t hidden, std::size_t out,
                         const std::string& name, std::uint64_t seed)
    : up_(in, hidden, name + ".up", seed), down_(hidden, out, name + ".down", seed) {}

Tensor FeedForward::forward(const Tensor& x) const {
    return down_.forward(leaky_relu(up_.forward(x), kLeakySlope));
}

void FeedForward::collect(ParamSet& params) const {
    up_.collect(params);
    down_.collect(params);
}

TransformerBlock::TransformerBlock(std::size_t width, std::size_t hidden, std::size_t heads,
                                   const std::string& name, std::uint64_t seed)
    : norm1_(width, name + ".norm1"),
      norm2_(width, name + ".norm2"),
      attn_(width, heads, name + ".attn", seed),
      ff_(width, hidden, width, name + ".ff", seed) {}

Tensor TransformerBlock::forward(const Tensor& x, const FrameMask& mask) const {
    Tensor h = norm1_.forward(x);
    Tensor y = add(x, attn_.forward(h, h, mask));
    return add(y, ff_.forward(norm2_.forward(y)));
}

void TransformerBlock::collect(ParamSet& params) const {
    norm1_.collect(params);
    attn_.collect(params);
    norm2_.collect(params);
    ff_.collect(params);
}

}  // namespace astf::nn
