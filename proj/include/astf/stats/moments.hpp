#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "astf/numerics/mask.hpp"
#include "astf/numerics/nn.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::stats {

inline constexpr double kStatEps = 1e-5;

enum class Stat { Mean = 0, Variance = 1, Skewness = 2, Kurtosis = 3 };

const char* stat_name(Stat s);

// Which of the two higher-order moments take part. Mean and variance always do.
struct StatFlags {
    bool skew = true;
    bool kurt = true;

    std::vector<Stat> enabled() const;
    std::size_t count() const { return 2 + (skew ? 1 : 0) + (kurt ? 1 : 0); }
};

struct StatTuple {
    Tensor mu;
    Tensor var;
    Tensor skew;
    Tensor kurt;

    const Tensor& get(Stat s) const;
};

// Population moments of x along `axis`. `weights` is a 0/1 tensor that
// broadcasts against x and marks the samples that count. Deviations are
// standardized by max(sqrt(var), eps), so constant input gives skew = kurt = 0.
StatTuple moments(const Tensor& x, std::size_t axis, const Tensor& weights, double eps = kStatEps);

// x: [d x F x J] clip features. Results are [d x J].
StatTuple frame_statistics(const Tensor& x, const FrameMask& mask, double eps = kStatEps);
// e: [F x d] frame-major latent. Results are [1 x d].
StatTuple latent_statistics(const Tensor& e, const FrameMask& mask, double eps = kStatEps);

// Mean/variance alignment of x onto y, both frame-major [F x d].
Tensor adain_baseline(const Tensor& x, const FrameMask& x_mask, const Tensor& y, const FrameMask& y_mask,
                      double eps = kStatEps);
Tensor adain_baseline(const Tensor& x, const Tensor& y, double eps = kStatEps);

// [F x d] -> [F x d*(1 + flags.count())]: e followed by each enabled moment
// broadcast over the valid frames.
Tensor simple_sdm(const Tensor& e, const FrameMask& mask, StatFlags flags = {}, double eps = kStatEps);

struct StatGroups {
    // index 0, 1, 2 = Q, K, V
    std::array<Tensor, 3> mu;
    std::array<Tensor, 3> var;
    std::array<Tensor, 3> skew;
    std::array<Tensor, 3> kurt;

    const std::array<Tensor, 3>& group(Stat s) const;
};

struct SdmOutput {
    Tensor q;
    Tensor k;
    Tensor v;
    StatGroups groups;
};

// Queries come from the content latent, keys and values from the style latent.
class Sdm {
public:
    Sdm() = default;
    Sdm(std::size_t width, const std::string& name, std::uint64_t seed, double eps = kStatEps);

    SdmOutput forward(const Tensor& e_style, const FrameMask& style_mask, const Tensor& e_content,
                      const FrameMask& content_mask) const;
    void collect(nn::ParamSet& params) const;

    const nn::Linear& query() const { return q_; }
    const nn::Linear& key() const { return k_; }
    const nn::Linear& value() const { return v_; }
    nn::Linear& query() { return q_; }
    nn::Linear& key() { return k_; }
    nn::Linear& value() { return v_; }

private:
    nn::Linear q_, k_, v_;
    double eps_ = kStatEps;
};

struct StatRow {
    std::string sequence_id;
    std::optional<std::string> style_label;
    std::size_t channel = 0;
    double mu = 0, var = 0, skew = 0, kurt = 0;
};

// One row per element of the tuple tensors, in row-major order.
std::vector<StatRow> stat_rows(const std::string& sequence_id, const std::optional<std::string>& style,
                               const StatTuple& stats);
void write_stats_csv(std::ostream& out, const std::vector<StatRow>& rows);

}  // namespace astf::stats
