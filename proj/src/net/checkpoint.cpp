#include "astf/net/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "astf/error.hpp"

namespace astf::net {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

// Layout (little-endian):
//   "ASTFCKPT", u32 version, u64 config hash, str config, u64 iteration,
//   u32 n_meta { str key, str value }, u32 n_tensors { str name, u32 ndim, u64 dims[], f64 data[] }
// where str = u64 length + bytes.

namespace {

constexpr char kMagic[8] = {'A', 'S', 'T', 'F', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxString = 1ull << 28;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw DataError("checkpoint truncated");
    return v;
}

std::string get_string(std::istream& in) {
    auto n = get<std::uint64_t>(in);
    if (n > kMaxString) throw DataError("checkpoint string too long");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw DataError("checkpoint truncated");
    return s;
}

}  // namespace

void Checkpoint::add(std::string name, const Tensor& t) {
    if (find(name)) throw ContractError("checkpoint already holds " + name);
    tensors.emplace_back(std::move(name), t.detach());
}

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

const std::string* Checkpoint::meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return &v;
    return nullptr;
}

void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, ck.version);
    put<std::uint64_t>(out, ck.config_hash);
    put_string(out, ck.config_text);
    put<std::uint64_t>(out, ck.iteration);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.meta.size()));
    for (const auto& [k, v] : ck.meta) {
        put_string(out, k);
        put_string(out, v);
    }
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
    for (const auto& [name, t] : ck.tensors) {
        put_string(out, name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.ndim()));
        for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
        auto v = t.values();
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing checkpoint");
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    write_checkpoint(ck, buf);
    atomic_write(path, buf.str());
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw DataError("not a checkpoint file");
    Checkpoint ck;
    ck.version = get<std::uint32_t>(in);
    if (ck.version != kCheckpointVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(ck.version));
    ck.config_hash = get<std::uint64_t>(in);
    ck.config_text = get_string(in);
    ck.iteration = get<std::uint64_t>(in);
    auto n_meta = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = get_string(in);
        ck.meta.emplace_back(std::move(k), get_string(in));
    }
    auto n_tensors = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = get_string(in);
        auto ndim = get<std::uint32_t>(in);
        if (ndim > 8) throw DataError("checkpoint tensor " + name + " has too many dimensions");
        Shape shape(ndim);
        std::uint64_t numel = 1;
        for (auto& d : shape) {
            d = get<std::uint64_t>(in);
            numel *= d;
            if (numel > kMaxString) throw DataError("checkpoint tensor " + name + " is too large");
        }
        std::vector<double> data(numel);
        in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(numel * sizeof(double)));
        if (!in) throw DataError("checkpoint truncated");
        ck.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after checkpoint");
    return ck;
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return read_checkpoint(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void check_config_hash(const Checkpoint& ck, std::uint64_t expected, bool force) {
    if (ck.config_hash != expected && !force)
        throw ContractError("checkpoint config hash " + std::to_string(ck.config_hash) +
                            " does not match the current config (" + std::to_string(expected) + ")");
}

void store_params(Checkpoint& ck, const nn::ParamSet& params, const std::string& prefix) {
    for (const auto& [name, t] : params.entries()) ck.add(prefix + name, t);
}

void load_params(const Checkpoint& ck, const nn::ParamSet& params, const std::string& prefix) {
    for (const auto& [name, t] : params.entries()) {
        const Tensor* src = ck.find(prefix + name);
        if (!src) throw DataError("checkpoint is missing " + prefix + name);
        if (src->shape() != t.shape())
            throw DataError("checkpoint tensor " + prefix + name + " has shape " + shape_str(src->shape()) +
                            ", expected " + shape_str(t.shape()));
        Tensor dst = t;
        auto from = src->values();
        std::copy(from.begin(), from.end(), dst.mutable_values().begin());
    }
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw DataError("cannot replace " + path.string() + ": " + ec.message());
    }
}

}  // namespace astf::net
