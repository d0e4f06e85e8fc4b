#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "astf/bvh/clip.hpp"

namespace astf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// args excludes the program name. Never throws; failures become exit codes
// with a message on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct Labels {
    std::optional<std::string> style, content;
};

// "angry_walking_03.bvh" -> style "angry", content "walking".
Labels labels_from_name(const std::filesystem::path& file);
// CSV with a header naming at least `file` and `style`; `content` optional.
std::map<std::string, Labels> read_label_csv(const std::filesystem::path& path);

// Every *.clip file of a directory, in file-name order.
std::vector<bvh::MotionClip> load_clip_dir(const std::filesystem::path& dir);

// Side-view stick figures, one per sampled valid frame.
std::string render_svg(const bvh::MotionClip& clip, std::size_t stride);

}  // namespace astf::cli
