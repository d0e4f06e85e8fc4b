#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "astf/numerics/tensor.hpp"

namespace astf {

// Validity of each frame of a fixed-length sequence (the region Ω).
class FrameMask {
public:
    FrameMask() = default;
    explicit FrameMask(std::vector<std::uint8_t> valid) : valid_(std::move(valid)) {}
    // `valid` leading frames true, remaining false.
    static FrameMask prefix(std::size_t valid, std::size_t length);
    static FrameMask all(std::size_t length) { return prefix(length, length); }

    std::size_t size() const noexcept { return valid_.size(); }
    std::size_t valid_count() const noexcept;
    bool operator[](std::size_t f) const { return valid_.at(f) != 0; }
    bool is_prefix() const noexcept;
    const std::vector<std::uint8_t>& raw() const noexcept { return valid_; }

    // [F x 1] tensor of 0/1, for multiplying frame-major features.
    Tensor column() const;
    // [1 x F] additive attention bias: 0 where valid, -1e9 where masked.
    Tensor key_bias() const;

    friend bool operator==(const FrameMask&, const FrameMask&) = default;

private:
    std::vector<std::uint8_t> valid_;
};

FrameMask intersect(const FrameMask& a, const FrameMask& b);

}  // namespace astf
