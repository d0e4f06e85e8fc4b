#include "astf/stats/moments.hpp"

#include <ostream>

#include "astf/error.hpp"
#include "astf/numerics/ops.hpp"

namespace astf::stats {

const char* stat_name(Stat s) {
    switch (s) {
        case Stat::Mean: return "mu";
        case Stat::Variance: return "var";
        case Stat::Skewness: return "skew";
        case Stat::Kurtosis: return "kurt";
    }
    return "?";
}

std::vector<Stat> StatFlags::enabled() const {
    std::vector<Stat> out{Stat::Mean, Stat::Variance};
    if (skew) out.push_back(Stat::Skewness);
    if (kurt) out.push_back(Stat::Kurtosis);
    return out;
}

const Tensor& StatTuple::get(Stat s) const {
    switch (s) {
        case Stat::Mean: return mu;
        case Stat::Variance: return var;
        case Stat::Skewness: return skew;
        case Stat::Kurtosis: return kurt;
    }
    throw ContractError("bad statistic");
}

const std::array<Tensor, 3>& StatGroups::group(Stat s) const {
    switch (s) {
        case Stat::Mean: return mu;
        case Stat::Variance: return var;
        case Stat::Skewness: return skew;
        case Stat::Kurtosis: return kurt;
    }
    throw ContractError("bad statistic");
}

StatTuple moments(const Tensor& x, std::size_t axis, const Tensor& weights, double eps) {
    if (axis >= x.ndim()) throw DimensionError("moments: axis out of range for " + shape_str(x.shape()));
    if (!(eps > 0.0)) throw ContractError("moments: eps must be positive");
    Tensor count = sum(broadcast_to(weights.detach(), x.shape()), axis, true);
    for (double c : count.values())
        if (c <= 0.0) throw ContractError("moments: no valid samples along the reduced axis");
    Tensor w = weights.detach();
    Tensor mu = div(sum(mul(x, w), axis, true), count);
    Tensor dev = mul(sub(x, mu), w);
    Tensor var = div(sum(square(dev), axis, true), count);
    Tensor sd = sqrt(clamp_min(var, eps * eps));
    Tensor z = div(dev, sd);
    Tensor z2 = square(z);
    Tensor skew = div(sum(mul(z2, z), axis, true), count);
    Tensor kurt = div(sum(square(z2), axis, true), count);
    return {mu, var, skew, kurt};
}

namespace {

StatTuple squeeze(const StatTuple& s, const Shape& shape) {
    return {reshape(s.mu, shape), reshape(s.var, shape), reshape(s.skew, shape), reshape(s.kurt, shape)};
}

}  // namespace

StatTuple frame_statistics(const Tensor& x, const FrameMask& mask, double eps) {
    if (x.ndim() != 3 || x.dim(1) != mask.size())
        throw DimensionError("frame_statistics: features " + shape_str(x.shape()) + " do not match mask of length " +
                             std::to_string(mask.size()));
    if (mask.valid_count() == 0) throw ContractError("frame_statistics: all frames are masked");
    Tensor w = reshape(mask.column(), {1, mask.size(), 1});
    return squeeze(moments(x, 1, w, eps), {x.dim(0), x.dim(2)});
}

StatTuple latent_statistics(const Tensor& e, const FrameMask& mask, double eps) {
    if (e.ndim() != 2 || e.dim(0) != mask.size())
        throw DimensionError("latent_statistics: latent " + shape_str(e.shape()) + " does not match mask of length " +
                             std::to_string(mask.size()));
    if (mask.valid_count() == 0) throw ContractError("latent_statistics: all frames are masked");
    return moments(e, 0, mask.column(), eps);
}

Tensor adain_baseline(const Tensor& x, const FrameMask& x_mask, const Tensor& y, const FrameMask& y_mask,
                      double eps) {
    if (x.ndim() != 2 || y.ndim() != 2 || x.dim(1) != y.dim(1))
        throw DimensionError("adain_baseline: " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
    StatTuple sx = latent_statistics(x, x_mask, eps);
    StatTuple sy = latent_statistics(y, y_mask, eps);
    Tensor sdx = sqrt(clamp_min(sx.var, eps * eps));
    Tensor sdy = sqrt(clamp_min(sy.var, eps * eps));
    Tensor out = add(mul(div(sub(x, sx.mu), sdx), sdy), sy.mu);
    return mul(out, x_mask.column());
}

Tensor adain_baseline(const Tensor& x, const Tensor& y, double eps) {
    return adain_baseline(x, FrameMask::all(x.dim(0)), y, FrameMask::all(y.dim(0)), eps);
}

Tensor simple_sdm(const Tensor& e, const FrameMask& mask, StatFlags flags, double eps) {
    StatTuple s = latent_statistics(e, mask, eps);
    Tensor m = mask.column();
    std::vector<Tensor> parts{e};
    for (Stat stat : flags.enabled()) parts.push_back(mul(broadcast_to(s.get(stat), e.shape()), m));
    return concat(parts, 1);
}

Sdm::Sdm(std::size_t width, const std::string& name, std::uint64_t seed, double eps)
    : q_(width, width, name + ".q", seed),
      k_(width, width, name + ".k", seed),
      v_(width, width, name + ".v", seed),
      eps_(eps) {}

SdmOutput Sdm::forward(const Tensor& e_style, const FrameMask& style_mask, const Tensor& e_content,
                       const FrameMask& content_mask) const {
    if (e_style.ndim() != 2 || e_content.ndim() != 2 || e_style.dim(1) != e_content.dim(1))
        throw DimensionError("sdm: latents " + shape_str(e_style.shape()) + " and " + shape_str(e_content.shape()) +
                             " differ in width");
    Tensor ms = style_mask.column();
    Tensor mc = content_mask.column();
    Tensor ns = nn::instance_normalize(e_style, style_mask, eps_);
    Tensor nc = nn::instance_normalize(e_content, content_mask, eps_);
    SdmOutput out;
    out.q = mul(q_.forward(nc), mc);
    out.k = mul(k_.forward(ns), ms);
    out.v = mul(v_.forward(ns), ms);
    const std::array<std::pair<const Tensor*, const FrameMask*>, 3> src{
        std::pair{&out.q, &content_mask}, std::pair{&out.k, &style_mask}, std::pair{&out.v, &style_mask}};
    for (std::size_t i = 0; i < 3; ++i) {
        StatTuple s = latent_statistics(*src[i].first, *src[i].second, eps_);
        out.groups.mu[i] = s.mu;
        out.groups.var[i] = s.var;
        out.groups.skew[i] = s.skew;
        out.groups.kurt[i] = s.kurt;
    }
    return out;
}

void Sdm::collect(nn::ParamSet& params) const {
    q_.collect(params);
    k_.collect(params);
    v_.collect(params);
}

std::vector<StatRow> stat_rows(const std::string& sequence_id, const std::optional<std::string>& style,
                               const StatTuple& stats) {
    std::vector<StatRow> rows;
    auto mu = stats.mu.values();
    auto var = stats.var.values();
    auto skew = stats.skew.values();
    auto kurt = stats.kurt.values();
    for (std::size_t i = 0; i < mu.size(); ++i) rows.push_back({sequence_id, style, i, mu[i], var[i], skew[i], kurt[i]});
    return rows;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_stats_csv(std::ostream& out, const std::vector<StatRow>& rows) {
    out << "sequence_id,style_label,channel,mu,var,skew,kurt\n";
    auto old = out.precision(17);
    for (const auto& r : rows) {
        out << csv_field(r.sequence_id) << ',' << csv_field(r.style_label.value_or("")) << ',' << r.channel << ','
            << r.mu << ',' << r.var << ',' << r.skew << ',' << r.kurt << '\n';
    }
    out.precision(old);
}

}  // namespace astf::stats
