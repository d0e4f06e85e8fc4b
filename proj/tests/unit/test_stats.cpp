#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/gradcheck.hpp"

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"
#include "astf/stats/moments.hpp"

using namespace astf;
using namespace astf::stats;

namespace {

// Direct summation over the definition, in long double, valid samples only.
struct Oracle {
    double mu, var, skew, kurt;
};

Oracle oracle(const std::vector<double>& xs, const std::vector<bool>& valid, double eps = kStatEps) {
    long double n = 0, s = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (valid[i]) {
            s += xs[i];
            n += 1;
        }
    long double mu = s / n;
    long double v = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (valid[i]) v += (xs[i] - mu) * (xs[i] - mu);
    v /= n;
    long double sd = std::sqrt(v);
    if (sd < eps) sd = eps;
    long double g = 0, b = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (valid[i]) {
            long double z = (xs[i] - mu) / sd;
            g += z * z * z;
            b += z * z * z * z;
        }
    return {static_cast<double>(mu), static_cast<double>(v), static_cast<double>(g / n), static_cast<double>(b / n)};
}

Oracle oracle(const std::vector<double>& xs) { return oracle(xs, std::vector<bool>(xs.size(), true)); }

StatTuple stats1(const std::vector<double>& xs) {
    Tensor x({1, xs.size(), 1}, xs);
    return frame_statistics(x, FrameMask::all(xs.size()));
}

// Column c of a frame-major [F x d] tensor.
std::vector<double> column(const Tensor& t, std::size_t c) {
    std::vector<double> out;
    for (std::size_t f = 0; f < t.dim(0); ++f) out.push_back(t.values()[f * t.dim(1) + c]);
    return out;
}

Tensor random_latent(std::size_t frames, std::size_t width, std::uint64_t seed) {
    Rng rng(seed);
    return Tensor::randn({frames, width}, rng);
}

}  // namespace

TEST_CASE("frame_statistics examples") {
    StatTuple s = stats1({0, 0, 0, 1});
    CHECK(s.mu.item() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.var.item() == doctest::Approx(0.1875).epsilon(1e-12));
    CHECK(std::abs(s.skew.item() - 1.1547005) < 1e-7);
    CHECK(std::abs(s.kurt.item() - 2.3333333) < 1e-7);
    Oracle o = oracle({0, 0, 0, 1});
    CHECK(std::abs(s.skew.item() - o.skew) < 1e-12);
    CHECK(std::abs(s.kurt.item() - o.kurt) < 1e-12);

    StatTuple sym = stats1({-1, 0, 1});
    CHECK(sym.mu.item() == 0.0);
    CHECK(std::abs(sym.skew.item()) < 1e-15);
    CHECK(std::abs(sym.kurt.item() - 1.5) < 1e-12);
    CHECK(std::abs(sym.kurt.item() - oracle({-1, 0, 1}).kurt) < 1e-12);

    StatTuple flat = stats1({3.5, 3.5, 3.5});
    CHECK(flat.mu.item() == 3.5);
    CHECK(flat.var.item() == 0.0);
    CHECK(flat.skew.item() == 0.0);
    CHECK(flat.kurt.item() == 0.0);

    CHECK_THROWS_AS(frame_statistics(Tensor::ones({1, 3, 1}), FrameMask::prefix(0, 3)), ContractError);
    CHECK_THROWS_AS(frame_statistics(Tensor::ones({1, 3, 1}), FrameMask::all(4)), DimensionError);
}

TEST_CASE("frame_statistics matches the oracle per dimension and joint") {
    std::mt19937_64 rng(4);
    std::gamma_distribution<double> gamma(2.0, 1.5);
    std::size_t d = 3, F = 17, J = 4, valid = 12;
    std::vector<double> xs(d * F * J, 0.0);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t f = 0; f < valid; ++f)
            for (std::size_t j = 0; j < J; ++j) xs[(c * F + f) * J + j] = gamma(rng) - 1.0 * static_cast<double>(j);
    StatTuple s = frame_statistics(Tensor({d, F, J}, xs), FrameMask::prefix(valid, F));
    CHECK(s.mu.shape() == Shape{d, J});
    std::vector<bool> mask(F);
    for (std::size_t f = 0; f < F; ++f) mask[f] = f < valid;
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t j = 0; j < J; ++j) {
            std::vector<double> series;
            for (std::size_t f = 0; f < F; ++f) series.push_back(xs[(c * F + f) * J + j]);
            Oracle o = oracle(series, mask);
            std::size_t k = c * J + j;
            CHECK(s.mu.values()[k] == doctest::Approx(o.mu).epsilon(1e-12));
            CHECK(s.var.values()[k] == doctest::Approx(o.var).epsilon(1e-12));
            CHECK(s.skew.values()[k] == doctest::Approx(o.skew).epsilon(1e-10));
            CHECK(s.kurt.values()[k] == doctest::Approx(o.kurt).epsilon(1e-10));
        }
}

TEST_CASE("moment invariants on random data") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::exponential_distribution<double> ex(1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + static_cast<std::size_t>(trial % 30);
        std::vector<double> xs(n);
        for (auto& x : xs) x = (trial % 2) ? u(rng) : ex(rng);
        StatTuple s = stats1(xs);
        double var = s.var.item(), g = s.skew.item(), b = s.kurt.item();
        CHECK(var >= 0.0);
        if (var > kStatEps) {
            CHECK(b >= g * g + 1.0 - 1e-9);
            CHECK(b >= 1.0 - 1e-9);
        }
    }
}

TEST_CASE("shift and scale covariance") {
    std::mt19937_64 rng(21);
    std::gamma_distribution<double> gamma(1.5, 1.0);
    std::vector<double> xs(40);
    for (auto& x : xs) x = gamma(rng);
    StatTuple s = stats1(xs);
    for (double a : {0.5, 3.0, 17.0})
        for (double b : {-4.0, 0.0, 2.5}) {
            std::vector<double> ys;
            for (double x : xs) ys.push_back(a * x + b);
            StatTuple t = stats1(ys);
            CHECK(t.mu.item() == doctest::Approx(a * s.mu.item() + b).epsilon(1e-12));
            CHECK(t.var.item() == doctest::Approx(a * a * s.var.item()).epsilon(1e-12));
            CHECK(std::abs(t.skew.item() - s.skew.item()) < 1e-6);
            CHECK(std::abs(t.kurt.item() - s.kurt.item()) < 1e-6);
        }
}

TEST_CASE("gaussian kurtosis is near three") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = n(rng);
    StatTuple s = stats1(xs);
    CHECK(s.kurt.item() >= 2.9);
    CHECK(s.kurt.item() <= 3.1);
}

TEST_CASE("negation flips skew and keeps kurtosis exactly") {
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> ex(2.0);
    std::vector<double> xs(33), neg;
    for (auto& x : xs) x = ex(rng);
    for (double x : xs) neg.push_back(-x);
    StatTuple a = stats1(xs), b = stats1(neg);
    CHECK(b.skew.item() == -a.skew.item());
    CHECK(b.kurt.item() == a.kurt.item());
}

TEST_CASE("masked zero frames never change the moments") {
    Tensor e = random_latent(10, 3, 8);
    StatTuple base = latent_statistics(e, FrameMask::all(10));
    Tensor padded = concat({e, Tensor::zeros({7, 3})}, 0);
    StatTuple more = latent_statistics(padded, FrameMask::prefix(10, 17));
    for (Stat st : StatFlags{}.enabled())
        for (std::size_t i = 0; i < 3; ++i) CHECK(more.get(st).values()[i] == base.get(st).values()[i]);
}

TEST_CASE("moments pass finite-difference checks") {
    Tensor x = random_latent(9, 3, 31).set_requires_grad();
    FrameMask mask = FrameMask::prefix(7, 9);
    for (Stat st : StatFlags{}.enabled()) {
        Tensor probe = testing::probe_weights({1, 3}, 40 + static_cast<std::uint64_t>(st));
        auto r = testing::check_gradients(
            [&] { return sum(mul(latent_statistics(x, mask).get(st), probe)); }, {{"x", x}});
        INFO(stat_name(st), " ", r.report);
        CHECK(r.ok);
    }
    Rng rng(2);
    Tensor clip = Tensor::randn({2, 8, 3}, rng).set_requires_grad();
    auto r = testing::check_gradients(
        [&] {
            StatTuple s = frame_statistics(clip, FrameMask::prefix(6, 8));
            return add(add(sum(s.skew), sum(s.kurt)), add(sum(s.var), sum(s.mu)));
        },
        {{"clip", clip}});
    CHECK(r.ok);
}

TEST_CASE("adain_baseline examples") {
    Tensor x = random_latent(12, 4, 3);
    Tensor same = adain_baseline(x, x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(std::abs(same.values()[i] - x.values()[i]) < 1e-9);

    Tensor r = adain_baseline(Tensor::matrix({{0}, {2}}), Tensor::matrix({{10}, {14}}));
    CHECK(std::abs(r.values()[0] - 10.0) < 1e-12);
    CHECK(std::abs(r.values()[1] - 14.0) < 1e-12);

    // standardize x, build y with mean 5 and sd 2
    StatTuple sx = latent_statistics(x, FrameMask::all(12));
    Tensor z = div(sub(x, sx.mu), sqrt(sx.var));
    Tensor y = add(mul(z, 2.0), 5.0);
    Tensor out = adain_baseline(z, y);
    StatTuple so = latent_statistics(out, FrameMask::all(12));
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(std::abs(so.mu.values()[c] - 5.0) < 1e-6);
        CHECK(std::abs(std::sqrt(so.var.values()[c]) - 2.0) < 1e-6);
    }

    Tensor w = random_latent(20, 4, 77);
    Tensor yy = add(mul(random_latent(15, 4, 78), 3.0), -1.0);
    StatTuple sy = latent_statistics(yy, FrameMask::prefix(11, 15));
    StatTuple sw = latent_statistics(adain_baseline(w, FrameMask::prefix(14, 20), yy, FrameMask::prefix(11, 15)),
                                     FrameMask::prefix(14, 20));
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(std::abs(sw.mu.values()[c] - sy.mu.values()[c]) < 1e-6);
        CHECK(std::abs(std::sqrt(sw.var.values()[c]) - std::sqrt(sy.var.values()[c])) < 1e-6);
    }
}

TEST_CASE("simple_sdm layout") {
    for (std::size_t d : {1u, 3u, 8u}) {
        Tensor e = random_latent(6, d, d);
        CHECK(simple_sdm(e, FrameMask::all(6)).shape() == Shape{6, 5 * d});
    }

    Tensor flat = Tensor::matrix({{1, -2}, {1, -2}, {1, -2}, {0, 0}});
    Tensor out = simple_sdm(flat, FrameMask::prefix(3, 4));
    for (std::size_t f = 0; f < 3; ++f) {
        CHECK(out.at({f, 2}) == 1.0);
        CHECK(out.at({f, 3}) == -2.0);
        for (std::size_t c = 4; c < 10; ++c) CHECK(out.at({f, c}) == 0.0);
    }
    for (std::size_t c = 0; c < 10; ++c) CHECK(out.at({3, c}) == 0.0);

    Tensor e = random_latent(9, 3, 12);
    FrameMask mask = FrameMask::prefix(7, 9);
    Tensor aug = simple_sdm(e, mask);
    std::vector<bool> valid(9);
    for (std::size_t f = 0; f < 9; ++f) valid[f] = f < 7;
    for (std::size_t c = 0; c < 3; ++c) {
        Oracle o = oracle(column(e, c), valid);
        for (std::size_t f = 0; f < 7; ++f) {
            CHECK(aug.at({f, 3 + c}) == doctest::Approx(o.mu).epsilon(1e-12));
            CHECK(aug.at({f, 6 + c}) == doctest::Approx(o.var).epsilon(1e-12));
            CHECK(aug.at({f, 9 + c}) == doctest::Approx(o.skew).epsilon(1e-10));
            CHECK(aug.at({f, 12 + c}) == doctest::Approx(o.kurt).epsilon(1e-10));
        }
    }

    CHECK(simple_sdm(e, mask, StatFlags{false, true}).shape() == Shape{9, 12});
    CHECK(simple_sdm(e, mask, StatFlags{false, false}).shape() == Shape{9, 9});
}

TEST_CASE("sdm statistics groups") {
    std::size_t d = 4;
    Sdm sdm(d, "sdm", 17);
    Tensor es = random_latent(10, d, 1);
    Tensor ec = random_latent(8, d, 2);
    FrameMask ms = FrameMask::prefix(9, 10), mc = FrameMask::prefix(6, 8);
    SdmOutput out = sdm.forward(es, ms, ec, mc);
    CHECK(out.q.shape() == Shape{8, d});
    CHECK(out.k.shape() == Shape{10, d});
    for (Stat st : StatFlags{}.enabled())
        for (const Tensor& t : out.groups.group(st)) CHECK(t.shape() == Shape{1, d});

    const Tensor* projected[3] = {&out.q, &out.k, &out.v};
    const FrameMask* masks[3] = {&mc, &ms, &ms};
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<bool> valid(masks[i]->size());
        for (std::size_t f = 0; f < valid.size(); ++f) valid[f] = (*masks[i])[f];
        for (std::size_t c = 0; c < d; ++c) {
            Oracle o = oracle(column(*projected[i], c), valid);
            CHECK(out.groups.mu[i].values()[c] == doctest::Approx(o.mu).epsilon(1e-12));
            CHECK(out.groups.var[i].values()[c] == doctest::Approx(o.var).epsilon(1e-12));
            CHECK(out.groups.skew[i].values()[c] == doctest::Approx(o.skew).epsilon(1e-9));
            CHECK(out.groups.kurt[i].values()[c] == doctest::Approx(o.kurt).epsilon(1e-9));
        }
        for (std::size_t f = masks[i]->valid_count(); f < masks[i]->size(); ++f)
            for (std::size_t c = 0; c < d; ++c) CHECK(projected[i]->at({f, c}) == 0.0);
    }

    // identical inputs and tied projections give identical group members
    Sdm tied(d, "sdm", 17);
    Tensor kw = tied.key().weight(), kb = tied.key().bias();
    std::ranges::copy(tied.query().weight().values(), kw.mutable_values().begin());
    std::ranges::copy(tied.query().bias().values(), kb.mutable_values().begin());
    SdmOutput same = tied.forward(es, ms, es, ms);
    for (Stat st : StatFlags{}.enabled())
        for (std::size_t c = 0; c < d; ++c) CHECK(same.groups.group(st)[0].values()[c] == same.groups.group(st)[1].values()[c]);

    CHECK_THROWS_AS(sdm.forward(es, ms, random_latent(8, d + 1, 3), mc), DimensionError);
}

TEST_CASE("stats csv export") {
    StatTuple s = stats1({0, 0, 0, 1});
    std::ostringstream out;
    write_stats_csv(out, stat_rows("clip,1", std::string("happy"), s));
    std::string text = out.str();
    CHECK(text.rfind("sequence_id,style_label,channel,mu,var,skew,kurt\n", 0) == 0);
    CHECK(text.find("\"clip,1\",happy,0,0.25,0.1875,") != std::string::npos);
}
