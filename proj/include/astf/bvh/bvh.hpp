#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "astf/bvh/skeleton.hpp"

namespace astf::bvh {

RawMotion parse_bvh(std::string_view text);
RawMotion parse_bvh(std::istream& in);
RawMotion load_bvh(const std::filesystem::path& path);

// Values are written with 6 significant digits; the frame time is written
// exactly.
void write_bvh(const RawMotion& m, std::ostream& out);
std::string write_bvh(const RawMotion& m);

// Shortest decimal text that reads back to the same double.
std::string format_exact(double v);
std::string format_short(double v, int digits = 6);

}  // namespace astf::bvh
