#pragma once

#include <cstddef>

#include "astf/net/networks.hpp"
#include "astf/numerics/mask.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::train {

inline constexpr double kSimEps = 1e-8;

// -sum over frames in Ω of cos(r[f], z[f]); r, z: [F x C].
Tensor sim(const Tensor& r, const Tensor& z, const FrameMask& omega, double eps = kSimEps);

// (1/3) sim(r1, sg z2) + (1/3) sim(r2, sg z1)
Tensor mcr_ss(const Tensor& r1, const Tensor& z1, const Tensor& r2, const Tensor& z2, const FrameMask& omega);
// (1/3) sim(r_g, sg z_s)
Tensor mcr_sgn(const Tensor& r_g, const Tensor& z_s, const FrameMask& omega);

// Style-style term through the discriminator for one crop pair.
Tensor loss_ss(const net::Discriminator& d, const net::CropPair& crops);
// Style-generation term; z_g and z_s are D_0 features of M_G and M_S.
Tensor loss_sgn(const net::Discriminator& d, const Tensor& z_g, const FrameMask& g_mask, const Tensor& z_s,
                const FrameMask& s_mask);

// Logit of class y from a [1 x styles] row.
Tensor class_logit(const Tensor& logits, std::size_t y);
// softplus(-D(real)[y]) + softplus(D(fake)[y])
Tensor adversarial_d(const Tensor& real_logit, const Tensor& fake_logit);
// softplus(-D(fake)[y])
Tensor adversarial_g(const Tensor& fake_logit);
// (gamma / 2) * |d real_logit / d input|^2; `input` must be the leaf the logit was computed from.
Tensor r1_penalty(const Tensor& real_logit, const Tensor& input, double gamma);

// Mean of (a - b)^2 over the frames of Ω and every channel.
Tensor masked_mse(const Tensor& a, const Tensor& b, const FrameMask& omega);
Tensor loss_style_align(const Tensor& e_g, const Tensor& e_s, const FrameMask& omega);

}  // namespace astf::train
