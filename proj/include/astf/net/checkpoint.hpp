#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "astf/numerics/nn.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Versioned container of named tensors plus the config that produced them.
struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    std::uint64_t config_hash = 0;
    std::string config_text;
    std::uint64_t iteration = 0;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void add(std::string name, const Tensor& t);
    const Tensor* find(const std::string& name) const;
    const std::string* meta_value(const std::string& key) const;
};

void write_checkpoint(const Checkpoint& ck, std::ostream& out);
// Written to a temporary sibling and renamed into place.
void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Throws ContractError on a hash mismatch unless `force`.
void check_config_hash(const Checkpoint& ck, std::uint64_t expected, bool force);

// Copies every parameter into the checkpoint under prefix + name.
void store_params(Checkpoint& ck, const nn::ParamSet& params, const std::string& prefix);
// Overwrites parameter values in place; every parameter must be present with
// a matching shape.
void load_params(const Checkpoint& ck, const nn::ParamSet& params, const std::string& prefix);

// Replace `path` with `bytes` via a temporary file and rename.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

}  // namespace astf::net
