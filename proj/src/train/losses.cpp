#include "astf/train/losses.hpp"

#include "astf/error.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/numerics/ops.hpp"

namespace astf::train {

namespace {

void check_pair(const Tensor& a, const Tensor& b, const FrameMask& omega, const char* who) {
    if (a.shape() != b.shape() || a.ndim() != 2 || a.dim(0) != omega.size())
        throw DimensionError(std::string(who) + ": " + shape_str(a.shape()) + " vs " + shape_str(b.shape()) +
                             " over " + std::to_string(omega.size()) + " frames");
    if (omega.valid_count() == 0) throw ContractError(std::string(who) + ": empty valid region");
}

Tensor row_norm(const Tensor& x, double eps) { return sqrt(clamp_min(sum(square(x), 1, true), eps * eps)); }

}  // namespace

Tensor sim(const Tensor& r, const Tensor& z, const FrameMask& omega, double eps) {
    check_pair(r, z, omega, "sim");
    Tensor cos = div(sum(mul(r, z), 1, true), mul(row_norm(r, eps), row_norm(z, eps)));
    return neg(sum(mul(cos, omega.column())));
}

Tensor mcr_ss(const Tensor& r1, const Tensor& z1, const Tensor& r2, const Tensor& z2, const FrameMask& omega) {
    Tensor a = sim(r1, stop_gradient(z2), omega);
    Tensor b = sim(r2, stop_gradient(z1), omega);
    return add(mul(a, 1.0 / 3.0), mul(b, 1.0 / 3.0));
}

Tensor mcr_sgn(const Tensor& r_g, const Tensor& z_s, const FrameMask& omega) {
    return mul(sim(r_g, stop_gradient(z_s), omega), 1.0 / 3.0);
}

Tensor loss_ss(const net::Discriminator& d, const net::CropPair& crops) {
    Tensor z1 = d.features(crops.s1);
    Tensor z2 = d.features(crops.s2);
    FrameMask omega = intersect(crops.s1.mask, crops.s2.mask);
    return mcr_ss(d.mcr_refine(z1, crops.s1.mask), z1, d.mcr_refine(z2, crops.s2.mask), z2, omega);
}

Tensor loss_sgn(const net::Discriminator& d, const Tensor& z_g, const FrameMask& g_mask, const Tensor& z_s,
                const FrameMask& s_mask) {
    return mcr_sgn(d.mcr_refine(z_g, g_mask), z_s, intersect(g_mask, s_mask));
}

Tensor class_logit(const Tensor& logits, std::size_t y) {
    if (logits.ndim() != 2 || logits.dim(0) != 1 || y >= logits.dim(1))
        throw DimensionError("class_logit: class " + std::to_string(y) + " outside logits " +
                             shape_str(logits.shape()));
    return reshape(slice(logits, 1, y, y + 1), {});
}

Tensor adversarial_d(const Tensor& real_logit, const Tensor& fake_logit) {
    return add(softplus(neg(real_logit)), softplus(fake_logit));
}

Tensor adversarial_g(const Tensor& fake_logit) { return softplus(neg(fake_logit)); }

Tensor r1_penalty(const Tensor& real_logit, const Tensor& input, double gamma) {
    Tensor inputs[] = {input};
    std::vector<Tensor> g = grad(real_logit, inputs, true);
    Tensor sq = g[0].defined() ? sum(square(g[0])) : Tensor::scalar(0.0);
    return mul(sq, gamma / 2.0);
}

Tensor masked_mse(const Tensor& a, const Tensor& b, const FrameMask& omega) {
    check_pair(a, b, omega, "masked_mse");
    double n = static_cast<double>(omega.valid_count() * a.dim(1));
    return mul(sum(mul(square(sub(a, b)), omega.column())), 1.0 / n);
}

Tensor loss_style_align(const Tensor& e_g, const Tensor& e_s, const FrameMask& omega) {
    return masked_mse(e_g, e_s, omega);
}

}  // namespace astf::train
