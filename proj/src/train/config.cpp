#include "astf/train/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "astf/error.hpp"
#include "astf/numerics/nn.hpp"

namespace astf::train {

namespace {

struct Field {
    const char* name;
    bool hashed;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, const std::string&)> set;
};

std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("expected a number");
    return v;
}

std::uint64_t parse_unsigned(const std::string& s) {
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw std::invalid_argument("expected a non-negative integer");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument("expected true or false");
}

template <class Get>
Field real(const char* name, bool hashed, Get get) {
    return {name, hashed, [get](const TrainConfig& c) { return format_double(get(c)); },
            [get](TrainConfig& c, const std::string& v) { get(c) = parse_double(v); }};
}

template <class Get>
Field count(const char* name, bool hashed, Get get) {
    return {name, hashed, [get](const TrainConfig& c) { return std::to_string(get(c)); },
            [get](TrainConfig& c, const std::string& v) {
                get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(parse_unsigned(v));
            }};
}

template <class Get>
Field flag(const char* name, bool hashed, Get get) {
    return {name, hashed,
            [get](const TrainConfig& c) { return std::string(get(c) ? "true" : "false"); },
            [get](TrainConfig& c, const std::string& v) { get(c) = parse_bool(v); }};
}

#define ASTF_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        real("lambda_mcr", true, ASTF_REF(lambda_mcr)),
        real("lambda_r", true, ASTF_REF(lambda_r)),
        real("lambda_c", true, ASTF_REF(lambda_c)),
        real("lambda_a", true, ASTF_REF(lambda_a)),
        real("lr_g", true, ASTF_REF(lr_g)),
        real("lr_d", true, ASTF_REF(lr_d)),
        real("adam_beta1", true, ASTF_REF(adam_beta1)),
        real("adam_beta2", true, ASTF_REF(adam_beta2)),
        count("batch_size", true, ASTF_REF(batch_size)),
        count("iterations", false, ASTF_REF(iterations)),
        count("seed", true, ASTF_REF(seed)),
        flag("use_mcr_ss", true, ASTF_REF(use_mcr_ss)),
        flag("use_mcr_sgn", true, ASTF_REF(use_mcr_sgn)),
        flag("use_simple_sdm", true, ASTF_REF(net.use_simple_sdm)),
        flag("use_skew", true, ASTF_REF(net.use_skew)),
        flag("use_kurt", true, ASTF_REF(net.use_kurt)),
        flag("use_style_align", true, ASTF_REF(use_style_align)),
        real("r1_gamma", true, ASTF_REF(r1_gamma)),
        count("crop_min", true, ASTF_REF(crop_min)),
        real("grad_clip", true, ASTF_REF(grad_clip)),
        count("log_interval", false, ASTF_REF(log_interval)),
        count("checkpoint_interval", false, ASTF_REF(checkpoint_interval)),
        count("joints", true, ASTF_REF(net.joints)),
        count("clip_length", true, ASTF_REF(net.clip_length)),
        count("latent", true, ASTF_REF(net.latent)),
        count("ffn_hidden", true, ASTF_REF(net.ffn_hidden)),
        count("encoder_blocks", true, ASTF_REF(net.encoder_blocks)),
        count("decoder_blocks", true, ASTF_REF(net.decoder_blocks)),
        count("heads", true, ASTF_REF(net.heads)),
        count("stat_hidden", true, ASTF_REF(net.stat_hidden)),
        count("d0_blocks", true, ASTF_REF(net.d0_blocks)),
        count("d0_width", true, ASTF_REF(net.d0_width)),
        count("mcr_hidden", true, ASTF_REF(net.mcr_hidden)),
    };
    return table;
}

#undef ASTF_REF

const Field* find_field(std::string_view key) {
    for (const Field& f : fields())
        if (key == f.name) return &f;
    return nullptr;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void TrainConfig::validate() const {
    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ContractError(std::string("config: ") + key + " " + what);
    };
    require(lambda_mcr >= 0, "lambda_mcr", "must be >= 0");
    require(lambda_r >= 0, "lambda_r", "must be >= 0");
    require(lambda_c >= 0, "lambda_c", "must be >= 0");
    require(lambda_a >= 0, "lambda_a", "must be >= 0");
    require(lr_g > 0, "lr_g", "must be > 0");
    require(lr_d > 0, "lr_d", "must be > 0");
    require(adam_beta1 >= 0 && adam_beta1 < 1, "adam_beta1", "must lie in [0, 1)");
    require(adam_beta2 >= 0 && adam_beta2 < 1, "adam_beta2", "must lie in [0, 1)");
    require(batch_size > 0, "batch_size", "must be > 0");
    require(r1_gamma >= 0, "r1_gamma", "must be >= 0");
    require(grad_clip >= 0, "grad_clip", "must be >= 0");
    require(log_interval > 0, "log_interval", "must be > 0");
    require(net.joints > 0, "joints", "must be > 0");
    require(net.clip_length > 0, "clip_length", "must be > 0");
    require(net.latent > 0, "latent", "must be > 0");
    require(net.heads > 0 && net.latent % net.heads == 0, "heads", "must divide latent");
    require(net.d0_blocks > 0, "d0_blocks", "must be > 0");
    require(net.d0_width > 0, "d0_width", "must be > 0");
}

TrainConfig parse_config(std::string_view text) {
    TrainConfig cfg;
    std::size_t line_no = 0;
    std::vector<std::string> seen;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::string content = trim(line);
        if (content.empty()) continue;
        auto eq = content.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        std::string key = trim(std::string_view(content).substr(0, eq));
        std::string value = trim(std::string_view(content).substr(eq + 1));
        const Field* f = find_field(key);
        if (!f) throw ParseError(line_no, "unknown config key '" + key + "'");
        for (const auto& s : seen)
            if (s == key) throw ParseError(line_no, "duplicate config key '" + key + "'");
        seen.push_back(key);
        try {
            f->set(cfg, value);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, key + ": " + e.what() + ", got '" + value + "'");
        }
    }
    return cfg;
}

TrainConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.message());
    }
}

std::string dump_config(const TrainConfig& cfg) {
    std::string out;
    for (const Field& f : fields()) out += std::string(f.name) + " = " + f.get(cfg) + "\n";
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const Field& f : fields()) keys.emplace_back(f.name);
    return keys;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    const Field* f = find_field(key);
    if (!f) throw ContractError("unknown config key '" + key + "'");
    try {
        f->set(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw ContractError(key + ": " + e.what() + ", got '" + value + "'");
    }
}

std::uint64_t config_hash(const TrainConfig& cfg) {
    std::string canon;
    for (const Field& f : fields())
        if (f.hashed) canon += std::string(f.name) + "=" + f.get(cfg) + "\n";
    return nn::fnv1a(canon);
}

}  // namespace astf::train
