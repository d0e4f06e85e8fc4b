#include "astf/numerics/mask.hpp"

#include <algorithm>

#include "astf/error.hpp"

namespace astf {

FrameMask FrameMask::prefix(std::size_t valid, std::size_t length) {
    if (valid > length) throw ContractError("mask prefix longer than sequence");
    std::vector<std::uint8_t> v(length, 0);
    std::fill(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(valid), 1);
    return FrameMask(std::move(v));
}

std::size_t FrameMask::valid_count() const noexcept {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

bool FrameMask::is_prefix() const noexcept {
    auto first_false = std::find(valid_.begin(), valid_.end(), 0);
    return std::find(first_false, valid_.end(), 1) == valid_.end();
}

Tensor FrameMask::column() const {
    std::vector<double> v(valid_.begin(), valid_.end());
    return Tensor(Shape{valid_.size(), 1}, std::move(v));
}

Tensor FrameMask::key_bias() const {
    std::vector<double> v(valid_.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = valid_[i] ? 0.0 : -1e9;
    return Tensor(Shape{1, valid_.size()}, std::move(v));
}

FrameMask intersect(const FrameMask& a, const FrameMask& b) {
    if (a.size() != b.size()) throw DimensionError("cannot intersect masks of different length");
    std::vector<std::uint8_t> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (a[i] && b[i]) ? 1 : 0;
    return FrameMask(std::move(v));
}

}  // namespace astf
