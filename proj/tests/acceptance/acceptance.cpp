// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run all
//   acceptance 1 4 8      run a subset

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "support/corpus.hpp"
#include "support/gradcheck.hpp"

#include "astf/attn/hos_attn.hpp"
#include "astf/bvh/bvh.hpp"
#include "astf/bvh/clip.hpp"
#include "astf/cli/cli.hpp"
#include "astf/error.hpp"
#include "astf/eval/metrics.hpp"
#include "astf/eval/separation.hpp"
#include "astf/net/networks.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/numerics/ops.hpp"
#include "astf/stats/moments.hpp"
#include "astf/train/losses.hpp"
#include "astf/train/synthetic.hpp"
#include "astf/train/trainer.hpp"

using namespace astf;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool ok = true;
    std::vector<std::string> failures;
    std::string summary;

    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (failures.size() < 5) failures.push_back(what);
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Tensor randm(Shape shape, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    return Tensor::randn(std::move(shape), rng, scale);
}

Tensor probe_loss(const Tensor& out, std::uint64_t seed) {
    return sum(mul(out, testing::probe_weights(out.shape(), seed)));
}

// zero-initialised tensors hide their inputs from the gradient
void lift_zero_params(const nn::ParamSet& params, std::uint64_t seed) {
    Rng rng(seed);
    for (const auto& [name, t] : params.entries()) {
        bool zero = true;
        for (double v : t.values()) zero = zero && v == 0.0;
        if (!zero) continue;
        Tensor h = t;
        for (double& v : h.mutable_values()) v = std::normal_distribution<double>(0.0, 0.5)(rng);
    }
}

Tensor zero_padding(Tensor t, std::size_t valid) {
    t = t.detach();
    std::size_t w = t.numel() / t.dim(0);
    for (std::size_t k = valid * w; k < t.numel(); ++k) t.mutable_values()[k] = 0.0;
    return t;
}

train::TrainConfig tiny_train_config() {
    train::TrainConfig c;
    c.net.joints = 3;
    c.net.clip_length = 12;
    c.net.latent = 8;
    c.net.ffn_hidden = 16;
    c.net.encoder_blocks = 1;
    c.net.decoder_blocks = 1;
    c.net.stat_hidden = 4;
    c.net.d0_blocks = 2;
    c.net.d0_width = 8;
    c.net.mcr_hidden = 8;
    c.batch_size = 2;
    c.crop_min = 3;
    c.lr_g = 1e-3;
    c.lr_d = 1e-3;
    c.log_interval = 1;
    c.seed = 5;
    return c;
}

std::shared_ptr<const train::Dataset> tiny_dataset(const train::TrainConfig& c) {
    auto clips = train::synthetic_corpus(2, 2, 2, c.net.joints, c.net.clip_length, 3);
    clips[1].features = clips[1].features.detach();
    auto v = clips[1].features.mutable_values();
    std::size_t L = c.net.clip_length, J = c.net.joints;
    for (std::size_t ch = 0; ch < bvh::kFeatureChannels; ++ch)
        for (std::size_t f = 5; f < L; ++f)
            for (std::size_t j = 0; j < J; ++j) v[(ch * L + f) * J + j] = 0.0;
    clips[1].mask = FrameMask::prefix(5, L);
    return std::make_shared<const train::Dataset>(train::make_dataset(clips));
}

// 1 ------------------------------------------------------------------------

struct MomentOracle {
    double mu, var, skew, kurt;
};

MomentOracle direct_moments(const std::vector<double>& xs, double eps) {
    long double n = static_cast<long double>(xs.size()), s = 0;
    for (double x : xs) s += x;
    long double mu = s / n, v = 0;
    for (double x : xs) v += (x - mu) * (x - mu);
    v /= n;
    long double sd = std::max<long double>(std::sqrt(v), eps);
    long double g = 0, b = 0;
    for (double x : xs) {
        long double z = (x - mu) / sd;
        g += z * z * z;
        b += z * z * z * z;
    }
    return {static_cast<double>(mu), static_cast<double>(v), static_cast<double>(g / n), static_cast<double>(b / n)};
}

Verdict criterion_moments() {
    Verdict v;
    Tensor x({1, 4, 1}, std::vector<double>{0, 0, 0, 1});
    stats::StatTuple s = stats::frame_statistics(x, FrameMask::all(4));
    v.expect(s.mu.item() == 0.25 && s.var.item() == 0.1875, "fixture mean/variance");
    // 2/sqrt(3) and 7/3
    v.expect(std::abs(s.skew.item() - 2.0 / std::sqrt(3.0)) < 1e-12, "fixture skew " + fmt(s.skew.item(), 10));
    v.expect(std::abs(s.kurt.item() - 7.0 / 3.0) < 1e-12, "fixture kurtosis " + fmt(s.kurt.item(), 10));

    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> dd(1, 8), ff(1, 40), jj(1, 6);
    std::uniform_real_distribution<double> offset(-5, 5), logscale(-2.3, 2.3), coin(0, 1);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t d = dd(rng), F = ff(rng), J = jj(rng);
        std::vector<double> xs(d * F * J);
        // mix of symmetric and skewed sources
        bool skewed = trial % 2 == 1;
        std::normal_distribution<double> n01(0, 1);
        std::exponential_distribution<double> e1(1.0);
        double off = offset(rng), sc = std::exp(logscale(rng));
        for (double& t : xs) t = off + sc * (skewed ? e1(rng) : n01(rng));
        std::vector<std::uint8_t> mask(F);
        for (auto& m : mask) m = coin(rng) < 0.8;
        mask[std::uniform_int_distribution<std::size_t>(0, F - 1)(rng)] = 1;
        FrameMask fm{std::vector<std::uint8_t>(mask)};
        stats::StatTuple st = stats::frame_statistics(Tensor({d, F, J}, xs), fm);
        for (std::size_t c = 0; c < d; ++c)
            for (std::size_t j = 0; j < J; ++j) {
                std::vector<double> series;
                for (std::size_t f = 0; f < F; ++f)
                    if (mask[f]) series.push_back(xs[(c * F + f) * J + j]);
                MomentOracle o = direct_moments(series, stats::kStatEps);
                std::size_t k = c * J + j;
                const double got[] = {st.mu.values()[k], st.var.values()[k], st.skew.values()[k], st.kurt.values()[k]};
                const double want[] = {o.mu, o.var, o.skew, o.kurt};
                for (int q = 0; q < 4; ++q) {
                    double rel = std::abs(got[q] - want[q]) / std::max(1.0, std::abs(want[q]));
                    worst = std::max(worst, rel);
                }
            }
    }
    v.expect(worst <= 1e-9, "worst relative error " + fmt(worst));
    v.summary = "1000 random tensors, worst relative error " + fmt(worst, 3);
    return v;
}

// 2 ------------------------------------------------------------------------

Verdict criterion_gradients() {
    Verdict v;
    std::size_t checks = 0, elements = 0;
    double worst = 0;
    auto run = [&](const std::string& name, const std::function<Tensor()>& loss,
                   std::vector<std::pair<std::string, Tensor>> leaves, testing::GradCheckOptions opt = {}) {
        opt.rtol = 1e-4;
        auto r = testing::check_gradients(loss, leaves, opt);
        ++checks;
        elements += r.checked;
        worst = std::max(worst, r.worst_excess);
        v.expect(r.ok, name + ": " + r.report);
    };
    auto leaf = [](Tensor t) { return t.detach().set_requires_grad(); };

    // statistics
    {
        Tensor x = leaf(randm({3, 6, 2}, 1));
        FrameMask m = FrameMask::prefix(5, 6);
        run("frame_statistics", [&] {
            auto s = stats::frame_statistics(x, m);
            return add(add(probe_loss(s.mu, 1), probe_loss(s.var, 2)), add(probe_loss(s.skew, 3), probe_loss(s.kurt, 4)));
        }, {{"x", x}});
        Tensor e = leaf(randm({7, 4}, 2));
        FrameMask me = FrameMask::prefix(6, 7);
        run("latent_statistics", [&] {
            auto s = stats::latent_statistics(e, me);
            return add(add(probe_loss(s.mu, 5), probe_loss(s.var, 6)), add(probe_loss(s.skew, 7), probe_loss(s.kurt, 8)));
        }, {{"e", e}});
        run("simple_sdm", [&] { return probe_loss(stats::simple_sdm(e, me), 9); }, {{"e", e}});

        stats::Sdm sdm(4, "sdm", 3);
        nn::ParamSet p;
        sdm.collect(p);
        Tensor es = leaf(randm({8, 4}, 3)), ec = leaf(randm({8, 4}, 4));
        FrameMask ms = FrameMask::prefix(8, 8), mc = FrameMask::prefix(6, 8);
        auto leaves = p.entries();
        leaves.emplace_back("e_style", es);
        leaves.emplace_back("e_content", ec);
        run("sdm", [&] {
            auto o = sdm.forward(es, ms, ec, mc);
            Tensor l = add(add(probe_loss(o.q, 10), probe_loss(o.k, 11)), probe_loss(o.v, 12));
            std::uint64_t seed = 20;
            for (auto s : {stats::Stat::Mean, stats::Stat::Variance, stats::Stat::Skewness, stats::Stat::Kurtosis})
                for (const Tensor& g : o.groups.group(s)) l = add(l, probe_loss(g, seed++));
            return l;
        }, leaves);
    }

    // attention blocks
    {
        attn::StatCrossAttention sca(5, "sca", 4);
        nn::ParamSet p;
        sca.collect(p);
        lift_zero_params(p, 1);
        Tensor sq = leaf(randm({1, 4}, 1)), sk = leaf(randm({1, 4}, 2)), sv = leaf(randm({1, 4}, 3));
        auto leaves = p.entries();
        for (auto& [n, t] : std::vector<std::pair<std::string, Tensor>>{{"sq", sq}, {"sk", sk}, {"sv", sv}})
            leaves.emplace_back(n, t);
        run("stat cross-attention", [&] { return probe_loss(sca.attend(sq, sk, sv).output, 4); }, leaves);

        std::vector<stats::Stat> all{stats::Stat::Mean, stats::Stat::Variance, stats::Stat::Skewness,
                                     stats::Stat::Kurtosis};
        attn::GateSelfAttention gsa(3, all, 1, "gsa", 5);
        nn::ParamSet pg;
        gsa.collect(pg);
        lift_zero_params(pg, 2);
        Tensor q = leaf(randm({6, 3}, 5));
        attn::RefinedStats refined;
        auto gl = pg.entries();
        gl.emplace_back("q", q);
        for (auto s : all) {
            refined[s] = leaf(randm({1, 3}, 40 + static_cast<std::uint64_t>(s)));
            gl.emplace_back(std::string("stat") + stats::stat_name(s), refined[s]);
        }
        FrameMask m = FrameMask::prefix(5, 6);
        run("gate self-attention", [&] { return probe_loss(gsa.forward(q, refined, m), 6); }, gl);

        Tensor a = leaf(randm({5, 3}, 7)), b = leaf(randm({5, 3}, 8));
        run("cosine gate", [&] { return attn::cosine_gate(a, b); }, {{"a", a}, {"b", b}});
        Tensor lam = leaf(Tensor::scalar(0.3));
        run("gate residual", [&] { return probe_loss(attn::gate_residual(a, b, lam), 9); },
            {{"f_c", a}, {"q", b}, {"gate", lam}});

        attn::HosConfig hc;
        hc.width = 3;
        hc.latent = 2;
        hc.ffn_hidden = 4;
        hc.stat_hidden = 2;
        attn::HosAttn hos(hc, "hos", 4);
        stats::Sdm sdm(3, "sdm", 4);
        nn::ParamSet ph;
        sdm.collect(ph);
        hos.collect(ph);
        lift_zero_params(ph, 3);
        Tensor es = randm({6, 3}, 10), ec = zero_padding(randm({6, 3}, 11), 4);
        FrameMask mc = FrameMask::prefix(4, 6), ms = FrameMask::all(6);
        run("hos attention", [&] {
            auto s = sdm.forward(es, ms, ec, mc);
            return probe_loss(hos.forward(s.q, s.k, s.groups, mc).e_t, 12);
        }, ph.entries());
    }

    // losses
    {
        FrameMask om = FrameMask::prefix(5, 6);
        Tensor r1 = leaf(randm({6, 4}, 1)), z1 = leaf(randm({6, 4}, 2));
        Tensor r2 = leaf(randm({6, 4}, 3)), z2 = leaf(randm({6, 4}, 4));
        run("sim", [&] { return train::sim(r1, z1, om); }, {{"r", r1}, {"z", z1}});
        // targets sit behind a stop-gradient, so only the refined side is probed
        run("mcr_ss", [&] { return train::mcr_ss(r1, z1, r2, z2, om); }, {{"r1", r1}, {"r2", r2}});
        run("mcr_sgn", [&] { return train::mcr_sgn(r1, z2, om); }, {{"r_g", r1}});
        Tensor lr = leaf(Tensor::scalar(0.7)), lf = leaf(Tensor::scalar(-0.4));
        run("adversarial_d", [&] { return train::adversarial_d(lr, lf); }, {{"real", lr}, {"fake", lf}});
        run("adversarial_g", [&] { return train::adversarial_g(lf); }, {{"fake", lf}});
        run("masked_mse", [&] { return train::masked_mse(r1, z1, om); }, {{"a", r1}, {"b", z1}});
        run("style align", [&] { return train::loss_style_align(r2, z2, om); }, {{"e_g", r2}, {"e_s", z2}});

        net::NetConfig nc;
        nc.joints = 2;
        nc.clip_length = 8;
        nc.latent = 4;
        nc.ffn_hidden = 6;
        nc.stat_hidden = 3;
        nc.d0_blocks = 2;
        nc.d0_width = 4;
        nc.mcr_hidden = 5;
        nc.styles = 3;
        nc.seed = 11;
        net::Discriminator d(nc);
        nn::ParamSet pd = d.parameters();
        Tensor m = leaf(zero_padding(randm({8, nc.motion_width()}, 5, 0.7), 7));
        FrameMask mm = FrameMask::prefix(7, 8);
        auto leaves = pd.entries();
        leaves.emplace_back("x", m);
        testing::GradCheckOptions r1opt;
        r1opt.probe_with_grad_mode = true;
        r1opt.max_elements = 8;
        run("r1 penalty", [&] {
            return train::r1_penalty(train::class_logit(d.discriminate({m, mm}).logits, 1), m, 1.0);
        }, leaves, r1opt);

        // D_0 feeds both the refined branch and the stopped target; probe the MCR head
        nn::ParamSet head;
        for (const auto& [n, t] : pd.entries())
            if (n.rfind("D.mcr", 0) == 0) head.add(n, t);
        Rng crop_rng(3);
        auto crops = net::random_crop_pair({m, mm}, crop_rng, 2);
        testing::GradCheckOptions sub;
        sub.max_elements = 10;
        if (crops) run("loss_ss through D", [&] { return train::loss_ss(d, *crops); }, head.entries(), sub);
        v.expect(crops.has_value(), "crop pair for loss_ss");
        Tensor zg = leaf(randm({8, 4}, 6)), zs = leaf(randm({8, 4}, 7));
        auto sl = head.entries();
        sl.emplace_back("z_g", zg);
        run("loss_sgn through D", [&] { return train::loss_sgn(d, zg, mm, zs, FrameMask::all(8)); }, sl, sub);
    }

    // networks
    {
        net::NetConfig nc;
        nc.joints = 2;
        nc.clip_length = 6;
        nc.latent = 4;
        nc.ffn_hidden = 6;
        nc.stat_hidden = 3;
        nc.encoder_blocks = 1;
        nc.decoder_blocks = 1;
        nc.d0_blocks = 2;
        nc.d0_width = 4;
        nc.mcr_hidden = 5;
        nc.styles = 3;
        nc.seed = 11;
        FrameMask m5 = FrameMask::prefix(5, 6), m6 = FrameMask::all(6);
        Tensor x = leaf(zero_padding(randm({6, nc.motion_width()}, 1, 0.7), 5));
        testing::GradCheckOptions sub;
        sub.max_elements = 8;

        net::Encoder enc(nc, "enc");
        nn::ParamSet pe;
        enc.collect(pe);
        auto le = pe.entries();
        le.emplace_back("x", x);
        run("encoder", [&] { return probe_loss(enc.forward(x, m5), 1); }, le, sub);

        net::Decoder dec(nc, "dec");
        nn::ParamSet pdc;
        dec.collect(pdc);
        Tensor z = leaf(randm({6, nc.latent}, 2));
        auto ld = pdc.entries();
        ld.emplace_back("z", z);
        run("decoder", [&] { return probe_loss(dec.forward(z, m5), 2); }, ld, sub);

        net::Generator g(nc);
        nn::ParamSet pg = g.parameters();
        lift_zero_params(pg, 4);
        net::Motion mc{x.detach(), m5}, ms{randm({6, nc.motion_width()}, 3, 0.7), m6};
        testing::GradCheckOptions gsub;
        gsub.max_elements = 4;
        run("generator", [&] { return probe_loss(g.generate(mc, ms).m_g, 3); }, pg.entries(), gsub);

        net::Discriminator d(nc);
        nn::ParamSet pd = d.parameters();
        auto ldd = pd.entries();
        ldd.emplace_back("x", x);
        run("D0 / D1 / MCR", [&] {
            net::DiscOutput o = d.discriminate({x, m5});
            return add(probe_loss(o.logits, 4), probe_loss(d.mcr_refine(o.z, m5), 5));
        }, ldd, sub);
    }

    v.summary = std::to_string(checks) + " finite-difference checks over " + std::to_string(elements) +
                " elements, worst error " + fmt(worst, 3) + " of tolerance";
    return v;
}

// 3 ------------------------------------------------------------------------

Verdict criterion_identities() {
    Verdict v;
    std::size_t n = 0;
    // gate residual endpoints
    Tensor fc = randm({5, 3}, 1), q = randm({5, 3}, 2);
    auto exact = [](const Tensor& a, const Tensor& b) {
        for (std::size_t i = 0; i < a.numel(); ++i)
            if (a.values()[i] != b.values()[i]) return false;
        return true;
    };
    v.expect(exact(attn::gate_residual(fc, q, 0.0), q), "gate 0 must return the content feature");
    v.expect(exact(attn::gate_residual(fc, q, 1.0), fc), "gate 1 must return the attended feature");
    n += 2;

    // cosine gate range and scale invariance
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> scale(0.01, 50.0);
    for (int t = 0; t < 100; ++t) {
        Tensor a = randm({6, 2}, 100 + static_cast<std::uint64_t>(t));
        Tensor b = randm({6, 2}, 300 + static_cast<std::uint64_t>(t), 3.0);
        double g = attn::cosine_gate(a, b).item();
        v.expect(g >= 0.0 && g <= 1.0, "gate out of [0,1]");
        double g2 = attn::cosine_gate(mul(a, scale(rng)), mul(b, scale(rng))).item();
        v.expect(std::abs(g - g2) <= 1e-9, "gate not scale invariant");
        n += 2;
    }
    v.expect(std::abs(attn::cosine_gate(fc, fc).item() - 1.0) < 1e-12, "gate(q, q) != 1");
    v.expect(std::abs(attn::cosine_gate(fc, neg(fc)).item()) < 1e-12, "gate(q, -q) != 0");

    // total loss composition over real training steps
    train::TrainConfig c = tiny_train_config();
    train::Trainer tr(c, tiny_dataset(c));
    for (int i = 0; i < 8; ++i) {
        train::LossReport r = tr.step();
        double d_gap = std::abs(r.total_d - (r.adv_d + r.r1 + c.lambda_mcr * (r.ss + r.sgn)));
        double g_gap = std::abs(r.total_g - (r.adv_g + c.lambda_r * r.recon + c.lambda_c * (r.cyc_c + r.cyc_s) +
                                             c.lambda_a * r.align));
        v.expect(d_gap <= 1e-9, "discriminator total off by " + fmt(d_gap));
        v.expect(g_gap <= 1e-9, "generator total off by " + fmt(g_gap));
        v.expect(std::abs(r.ss) <= 2.0 * static_cast<double>(c.net.clip_length) / 3.0, "L_ss out of bounds");
        n += 3;
    }

    // mcr bounds, random and through the discriminator
    for (int t = 0; t < 100; ++t) {
        std::size_t F = 3 + static_cast<std::size_t>(t % 6), valid = 1 + static_cast<std::size_t>(t) % F;
        FrameMask om = FrameMask::prefix(valid, F);
        Tensor r1 = randm({F, 4}, 1000 + t), z1 = randm({F, 4}, 2000 + t);
        Tensor r2 = randm({F, 4}, 3000 + t), z2 = randm({F, 4}, 4000 + t);
        double ss = train::mcr_ss(r1, z1, r2, z2, om).item();
        double bound = 2.0 * static_cast<double>(valid) / 3.0;
        v.expect(ss >= -bound - 1e-12 && ss <= bound + 1e-12, "mcr_ss outside its bound");
        ++n;
    }
    Tensor z = randm({6, 4}, 5);
    FrameMask om6 = FrameMask::all(6);
    v.expect(std::abs(train::mcr_ss(z, z, z, z, om6).item() + 4.0) < 1e-12, "mcr_ss lower endpoint");
    v.expect(std::abs(train::mcr_ss(neg(z), z, neg(z), z, om6).item() - 4.0) < 1e-12, "mcr_ss upper endpoint");

    // stop-gradient: the targets receive exactly zero
    Tensor r1 = randm({6, 3}, 6).set_requires_grad(), r2 = randm({6, 3}, 7).set_requires_grad();
    Tensor z1 = randm({6, 3}, 8).set_requires_grad(), z2 = randm({6, 3}, 9).set_requires_grad();
    FrameMask om = FrameMask::prefix(5, 6);
    Tensor wrt[] = {r1, r2, z1, z2};
    auto g = grad(train::mcr_ss(r1, z1, r2, z2, om), wrt);
    for (int i : {2, 3})
        if (g[i].defined())
            for (double x : g[i].values()) v.expect(x == 0.0, "gradient leaked into a stop-gradient target");
    double reach = 0;
    for (double x : g[0].values()) reach += std::abs(x);
    v.expect(reach > 0.0, "no gradient on the refined branch");
    Tensor wrt2[] = {r1, z1};
    auto g2 = grad(train::mcr_sgn(r1, z1, om), wrt2);
    if (g2[1].defined())
        for (double x : g2[1].values()) v.expect(x == 0.0, "gradient leaked into the style target");
    n += 4;

    v.summary = std::to_string(n) + " identity checks";
    return v;
}

// 4 ------------------------------------------------------------------------

Verdict criterion_separation() {
    Verdict v;
    auto clips = eval::synthetic_skew_corpus(100, 200, 2, 1);
    eval::SeparationOptions opt;
    opt.seed = 1;
    auto r = eval::separation_report(clips, opt);
    v.expect(r.accuracy_four >= 0.95, "4-moment accuracy " + fmt(r.accuracy_four));
    v.expect(r.accuracy_two <= 0.60, "2-moment accuracy " + fmt(r.accuracy_two));
    v.summary = "4-moment probe " + fmt(r.accuracy_four, 3) + ", 2-moment probe " + fmt(r.accuracy_two, 3) +
                " (5-fold, 200 clips)";
    return v;
}

// 5 ------------------------------------------------------------------------

Verdict criterion_training() {
    Verdict v;
    train::TrainConfig c;
    c.net.joints = 4;
    c.net.clip_length = 48;
    c.net.latent = 32;
    c.net.ffn_hidden = 64;
    c.net.encoder_blocks = 1;
    c.net.decoder_blocks = 1;
    c.net.stat_hidden = 8;
    c.net.d0_blocks = 2;
    c.net.d0_width = 32;
    c.net.mcr_hidden = 32;
    c.batch_size = 4;
    c.lr_g = 1e-3;
    c.lr_d = 1e-4;
    c.grad_clip = 0;
    c.iterations = 2000;
    c.log_interval = 100;
    c.seed = 1;
    auto clips = train::synthetic_corpus(2, 2, 5, c.net.joints, c.net.clip_length, 1);
    auto data = std::make_shared<const train::Dataset>(train::make_dataset(clips));
    train::Trainer tr(c, data);
    std::vector<double> recon;
    bool finite = true;
    try {
        for (std::size_t i = 0; i < c.iterations; ++i) {
            train::LossReport r = tr.step();
            for (double x : {r.adv_g, r.adv_d, r.r1, r.ss, r.sgn, r.recon, r.cyc_c, r.cyc_s, r.align, r.total_g,
                             r.total_d})
                finite = finite && std::isfinite(x);
            recon.push_back(r.recon);
        }
    } catch (const NumericError& e) {
        v.expect(false, e.what());
        finite = false;
    }
    v.expect(finite, "a loss report contained NaN or Inf");
    if (recon.size() < 100) return v;
    double first = 0, last = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        first += recon[i] / 50;
        last += recon[recon.size() - 50 + i] / 50;
    }
    double drop = 1.0 - last / first;
    v.expect(drop >= 0.8, "reconstruction fell by only " + fmt(100 * drop, 3) + "%");

    NoGradGuard guard;
    double geo = 0;
    for (const auto& s : data->samples) {
        auto out = tr.generator().generate(s.motion, s.motion);
        geo += eval::mean_geodesic(out.m_g, s.motion.values, s.motion.mask, c.net.joints);
    }
    geo /= static_cast<double>(data->samples.size());
    v.expect(geo < 0.15, "self-stylisation geodesic " + fmt(geo) + " rad");
    v.summary = "recon " + fmt(first, 3) + " -> " + fmt(last, 3) + " (" + fmt(100 * drop, 3) + "% drop), geodesic " +
                fmt(geo, 3) + " rad, " + std::to_string(recon.size()) + " steps";
    return v;
}

// 6 ------------------------------------------------------------------------

std::vector<Tensor> grads_of(const Tensor& loss, const nn::ParamSet& params) {
    std::vector<Tensor> inputs;
    for (const auto& [n, t] : params.entries()) inputs.push_back(t);
    auto g = grad(loss, inputs);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!g[i].defined()) g[i] = Tensor::zeros(inputs[i].shape());
    return g;
}

double grad_gap(const std::vector<Tensor>& on, const std::vector<Tensor>& off, const std::vector<Tensor>& term,
                double lambda) {
    double worst = 0;
    for (std::size_t i = 0; i < on.size(); ++i)
        for (std::size_t k = 0; k < on[i].numel(); ++k)
            worst = std::max(worst, std::abs(on[i].values()[k] - (off[i].values()[k] + lambda * term[i].values()[k])));
    return worst;
}

Verdict criterion_ablation() {
    Verdict v;
    train::TrainConfig on = tiny_train_config();
    auto data = tiny_dataset(on);
    train::Trainer t_on(on, data);
    Rng r0 = train::Trainer::iteration_rng(on.seed, 0);
    train::Batch batch = t_on.sample_batch(r0);
    std::vector<std::string> notes;

    // loss switches: the entry is zero and the update differs by exactly lambda * its gradient
    for (int which = 0; which < 2; ++which) {
        train::TrainConfig off = on;
        (which == 0 ? off.use_mcr_ss : off.use_mcr_sgn) = false;
        train::Trainer t_off(off, data);
        Rng ra = train::Trainer::iteration_rng(on.seed, 0), rb = ra;
        train::DLosses l_on = t_on.d_losses(batch, ra), l_off = t_off.d_losses(batch, rb);
        std::string name = which == 0 ? "mcr_ss" : "mcr_sgn";
        v.expect((which == 0 ? l_off.ss : l_off.sgn).item() == 0.0, name + " entry not zero");
        v.expect(l_off.adv.item() == l_on.adv.item() && l_off.r1.item() == l_on.r1.item(), name + " moved other terms");
        double gap = grad_gap(grads_of(l_on.total, t_on.discriminator().parameters()),
                              grads_of(l_off.total, t_off.discriminator().parameters()),
                              grads_of(which == 0 ? l_on.ss : l_on.sgn, t_on.discriminator().parameters()),
                              on.lambda_mcr);
        v.expect(gap < 1e-12, name + " gradient audit gap " + fmt(gap));
        train::Trainer step_off(off, data);
        train::LossReport rep = step_off.step();
        v.expect((which == 0 ? rep.ss : rep.sgn) == 0.0, name + " report entry not zero");
        notes.push_back(name + " gap " + fmt(gap, 2));
    }
    {
        train::TrainConfig off = on;
        off.use_style_align = false;
        train::Trainer t_off(off, data);
        train::GLosses l_on = t_on.g_losses(batch), l_off = t_off.g_losses(batch);
        v.expect(l_off.align.item() == 0.0 && l_on.align.item() > 0.0, "style-align entry");
        v.expect(l_off.recon.item() == l_on.recon.item() && l_off.adv.item() == l_on.adv.item(),
                 "style-align moved other terms");
        double gap = grad_gap(grads_of(l_on.total, t_on.generator().parameters()),
                              grads_of(l_off.total, t_off.generator().parameters()),
                              grads_of(l_on.align, t_on.generator().parameters()), on.lambda_a);
        v.expect(gap < 1e-12, "style-align gradient audit gap " + fmt(gap));
        train::Trainer step_off(off, data);
        v.expect(step_off.step().align == 0.0, "style-align report entry not zero");
        notes.push_back("align gap " + fmt(gap, 2));
    }

    // architectural switches: only the named modules disappear or narrow, and every
    // untouched parameter starts from the same values
    struct Arch {
        std::string name;
        std::function<void(train::TrainConfig&)> edit;
        std::vector<std::string> removed, narrowed;
    };
    std::vector<Arch> arches = {
        {"simple_sdm", [](train::TrainConfig& c) { c.net.use_simple_sdm = false; }, {".fuse."}, {}},
        {"skew", [](train::TrainConfig& c) { c.net.use_skew = false; }, {".cross.skew."},
         {".fuse.", ".hos.gate.", "D.mcr1."}},
        {"kurt", [](train::TrainConfig& c) { c.net.use_kurt = false; }, {".cross.kurt."},
         {".fuse.", ".hos.gate.", "D.mcr1."}},
    };
    auto matches = [](const std::string& name, const std::vector<std::string>& parts) {
        for (const auto& p : parts)
            if (name.find(p) != std::string::npos) return true;
        return false;
    };
    for (const auto& a : arches) {
        train::TrainConfig off = on;
        a.edit(off);
        train::Trainer t_off(off, data);
        for (bool gen : {true, false}) {
            nn::ParamSet full = gen ? t_on.generator().parameters() : t_on.discriminator().parameters();
            nn::ParamSet less = gen ? t_off.generator().parameters() : t_off.discriminator().parameters();
            std::map<std::string, Tensor> kept;
            for (const auto& [n, t] : less.entries()) kept.emplace(n, t);
            for (const auto& [n, t] : full.entries()) {
                auto it = kept.find(n);
                if (it == kept.end()) {
                    v.expect(matches(n, a.removed), a.name + " removed " + n);
                    continue;
                }
                if (it->second.shape() != t.shape()) {
                    v.expect(matches(n, a.narrowed), a.name + " reshaped " + n);
                    continue;
                }
                bool same = true;
                for (std::size_t k = 0; k < t.numel(); ++k) same = same && t.values()[k] == it->second.values()[k];
                v.expect(same, a.name + " changed the initial value of " + n);
                kept.erase(it);
            }
            for (const auto& [n, t] : kept)
                v.expect(full.find(n) != nullptr, a.name + " introduced " + n);
        }
        train::Trainer step_off(off, data);
        train::LossReport rep = step_off.step();
        v.expect(std::isfinite(rep.total_g) && std::isfinite(rep.total_d), a.name + " step not finite");
    }
    v.summary = "loss switches audited (" + notes[0] + ", " + notes[1] + ", " + notes[2] +
                "); simple_sdm, skew, kurt parameter inventories audited";
    return v;
}

// 7 ------------------------------------------------------------------------

Verdict criterion_bvh() {
    Verdict v;
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        train::SyntheticSpec spec;
        spec.joints = 3 + static_cast<std::size_t>(seed);
        spec.frames = 40;
        spec.seed = seed;
        spec.style = seed % 2;
        bvh::RawMotion m = train::synthetic_motion(spec);
        // text first: the writer keeps 6 significant digits
        bvh::RawMotion first = bvh::parse_bvh(bvh::write_bvh(m));
        std::string text = bvh::write_bvh(first);
        bvh::RawMotion back = bvh::parse_bvh(text);
        m = first;
        v.expect(back.skeleton == m.skeleton, "skeleton changed on round trip");
        v.expect(back.frame_count == m.frame_count && back.frames.size() == m.frames.size(), "frame count changed");
        v.expect(std::abs(back.frame_time - m.frame_time) <= 1e-6, "frame time changed");
        for (std::size_t i = 0; i < std::min(back.frames.size(), m.frames.size()); ++i)
            worst = std::max(worst, std::abs(back.frames[i] - m.frames[i]));
        v.expect(bvh::write_bvh(back) == text, "write is not a fixed point");
    }
    v.expect(worst <= 1e-6, "round trip error " + fmt(worst));

    train::SyntheticSpec xs;
    xs.frames = 120;
    bvh::MotionClip xia = bvh::preprocess_xia(train::synthetic_motion(xs));
    v.expect(xia.length() == 200 && xia.valid_frames() == 60 && xia.mask.is_prefix(), "xia 120 -> 60 valid frames");
    train::SyntheticSpec bs;
    bs.frames = 1000;
    auto bfa = bvh::preprocess_bfa(train::synthetic_motion(bs));
    v.expect(bfa.size() == 2, "bfa 1000 frames -> " + std::to_string(bfa.size()) + " clips");
    for (const auto& c : bfa) v.expect(c.valid_frames() == 200 && c.length() == 200, "bfa clip not fully valid");
    bs.frames = 800;
    v.expect(bvh::preprocess_bfa(train::synthetic_motion(bs)).size() == 2, "bfa 800 frames -> 2 clips");
    v.summary = "5 round trips, worst channel error " + fmt(worst, 3) + "; xia 120 -> 60 valid; bfa 1000 -> " +
                std::to_string(bfa.size()) + " clips";
    return v;
}

// 8 ------------------------------------------------------------------------

Verdict criterion_metrics() {
    Verdict v;
    constexpr double pi = std::numbers::pi;
    Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
    double quarter = eval::geodesic_distance(id, Eigen::AngleAxisd(pi / 2, Eigen::Vector3d::UnitZ()).toRotationMatrix());
    v.expect(std::abs(quarter - pi / 2) <= 1e-8, "quarter turn " + fmt(quarter, 12));
    Rng rng(2);
    std::normal_distribution<double> n(0, 1);
    double worst_half = 0;
    for (int k = 0; k < 20; ++k) {
        Eigen::Vector3d axis(n(rng), n(rng), n(rng));
        Eigen::Matrix3d half = Eigen::AngleAxisd(pi, axis.normalized()).toRotationMatrix();
        worst_half = std::max(worst_half, std::abs(eval::geodesic_distance(id, half) - pi));
    }
    v.expect(worst_half <= 1e-8, "half turn off by " + fmt(worst_half));
    v.expect(eval::geodesic_distance(id, id) == 0.0, "self distance");

    eval::FeatureDistribution a, b;
    a.mean = Eigen::VectorXd::Zero(1);
    b.mean = Eigen::VectorXd::Ones(1);
    a.cov = b.cov = Eigen::MatrixXd::Ones(1, 1);
    a.count = b.count = 2;
    double fd = eval::frechet_distance(a, b);
    v.expect(std::abs(fd - 1.0) <= 1e-8, "1-D Frechet " + fmt(fd, 12));

    double worst_sym = 0, min_val = 0;
    for (int k = 0; k < 50; ++k) {
        Eigen::MatrixXd xa = Eigen::MatrixXd::NullaryExpr(12, 5, [&] { return n(rng); });
        Eigen::MatrixXd xb = Eigen::MatrixXd::NullaryExpr(12, 5, [&] { return 0.5 + 2.0 * n(rng); });
        auto da = eval::FeatureDistribution::from_samples(xa), db = eval::FeatureDistribution::from_samples(xb);
        double ab = eval::frechet_distance(da, db), ba = eval::frechet_distance(db, da);
        worst_sym = std::max(worst_sym, std::abs(ab - ba));
        min_val = std::min({min_val, ab, eval::frechet_distance(da, da)});
        v.expect(eval::frechet_distance(da, da) <= 1e-8, "self Frechet not zero");
    }
    v.expect(worst_sym <= 1e-8, "Frechet asymmetry " + fmt(worst_sym));
    v.expect(min_val >= 0.0, "negative Frechet distance");
    v.summary = "geodesic pi/2 err " + fmt(std::abs(quarter - pi / 2), 2) + ", pi err " + fmt(worst_half, 2) +
                ", Frechet 1-D " + fmt(fd, 12) + ", worst asymmetry " + fmt(worst_sym, 2);
    return v;
}

// 9 ------------------------------------------------------------------------

Verdict criterion_determinism() {
    Verdict v;
    auto root = testing::scratch_dir("astf_acceptance_determinism");
    fs::create_directories(root / "bvh");
    testing::write_synthetic_bvh_dir(root / "bvh", 2, 2, 3, 3, 24, 9);
    train::TrainConfig c = tiny_train_config();
    c.iterations = 100;
    c.log_interval = 10;
    c.checkpoint_interval = 50;
    std::ofstream(root / "run.cfg") << train::dump_config(c);

    auto pipeline = [&](const std::string& tag) {
        std::ostringstream out, err;
        fs::path dir = root / tag;
        int a = cli::run({"preprocess", "--dataset", "xia", "--in", (root / "bvh").string(), "--out",
                          (dir / "clips").string(), "--joints", "all", "--length", "12"},
                         out, err);
        int b = cli::run({"--config", (root / "run.cfg").string(), "--seed", "17", "train", "--clips",
                          (dir / "clips").string(), "--out", (dir / "run").string()},
                         out, err);
        int e = cli::run({"--config", (root / "run.cfg").string(), "--seed", "17", "eval", "--clips",
                          (dir / "clips").string(), "--checkpoint", (dir / "run" / "checkpoint.astf").string(), "--out",
                          (dir / "metrics.json").string(), "--probe-epochs", "20"},
                         out, err);
        v.expect(a == 0 && b == 0 && e == 0, tag + " pipeline failed: " + err.str());
        return dir;
    };
    fs::path one = pipeline("a"), two = pipeline("b");
    std::size_t bytes = 0;
    for (const char* f : {"run/loss_log.csv", "run/checkpoint.astf", "metrics.json", "clips/manifest.csv"}) {
        std::string x = testing::read_text(one / f), y = testing::read_text(two / f);
        v.expect(!x.empty() && x == y, std::string(f) + " differs between runs");
        bytes += x.size();
    }
    std::string log = testing::read_text(one / "run/loss_log.csv");
    std::size_t rows = static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n'));
    v.expect(rows == 11, "loss log has " + std::to_string(rows) + " lines");
    v.summary = "preprocess -> 100 steps -> eval twice; loss log, checkpoint and metrics identical (" +
                std::to_string(bytes) + " bytes compared)";
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"moment oracle equivalence", criterion_moments},
        {"gradient suite", criterion_gradients},
        {"equation identities", criterion_identities},
        {"statistics separation", criterion_separation},
        {"desk-scale training smoke", criterion_training},
        {"ablation-flag fidelity", criterion_ablation},
        {"bvh round trip and preprocessing", criterion_bvh},
        {"metric fixtures", criterion_metrics},
        {"determinism", criterion_determinism},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu %-34s %s  [%.1fs] %s\n", i + 1, criteria[i].first.c_str(), v.ok ? "PASS" : "FAIL",
                    secs, v.summary.c_str());
        for (const auto& f : v.failures) std::printf("    - %s\n", f.c_str());
        std::fflush(stdout);
        failed += v.ok ? 0 : 1;
    }
    return failed ? 1 : 0;
}
