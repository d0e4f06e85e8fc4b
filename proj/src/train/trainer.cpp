#include "astf/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "astf/error.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/numerics/ops.hpp"
#include "astf/train/losses.hpp"

namespace astf::train {

namespace {

constexpr const char* kUnlabelled = "unlabelled";

std::string join_lines(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += '\n';
        out += items[i];
    }
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto nl = text.find('\n', start);
        out.push_back(text.substr(start, nl - start));
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

std::size_t index_of(const std::vector<std::string>& list, const std::string& v) {
    return static_cast<std::size_t>(std::lower_bound(list.begin(), list.end(), v) - list.begin());
}

void check_finite(const char* term, const Tensor& t, std::size_t iteration) {
    double v = t.item();
    if (!std::isfinite(v))
        throw NumericError("loss term " + std::string(term) + " is " + (std::isnan(v) ? "NaN" : "infinite") +
                           " at iteration " + std::to_string(iteration + 1));
}

void store_adam(net::Checkpoint& ck, const Adam& opt, const std::string& prefix) {
    const auto& entries = opt.params().entries();
    std::vector<double> steps;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        ck.add(prefix + "m/" + entries[i].first, opt.first_moments()[i]);
        ck.add(prefix + "v/" + entries[i].first, opt.second_moments()[i]);
        steps.push_back(static_cast<double>(opt.steps()[i]));
    }
    ck.add(prefix + "steps", Tensor({steps.size()}, steps));
}

void copy_into(const Tensor& src, Tensor dst, const std::string& name) {
    if (src.shape() != dst.shape()) throw DataError("checkpoint tensor " + name + " has the wrong shape");
    auto v = src.values();
    std::copy(v.begin(), v.end(), dst.mutable_values().begin());
}

void load_adam(const net::Checkpoint& ck, Adam& opt, const std::string& prefix) {
    const auto& entries = opt.params().entries();
    const Tensor* steps = ck.find(prefix + "steps");
    if (!steps || steps->numel() != entries.size()) throw DataError("checkpoint is missing " + prefix + "steps");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (auto [kind, store] : {std::pair{"m/", &opt.first_moments()}, std::pair{"v/", &opt.second_moments()}}) {
            std::string name = prefix + kind + entries[i].first;
            const Tensor* t = ck.find(name);
            if (!t) throw DataError("checkpoint is missing " + name);
            copy_into(*t, (*store)[i], name);
        }
        opt.steps()[i] = static_cast<std::uint64_t>(steps->values()[i]);
    }
}

Adam make_adam(const nn::ParamSet& params, const TrainConfig& cfg, double lr) {
    AdamOptions o;
    o.lr = lr;
    o.beta1 = cfg.adam_beta1;
    o.beta2 = cfg.adam_beta2;
    return Adam(params, o);
}

TrainConfig prepare(TrainConfig cfg, const std::shared_ptr<const Dataset>& data) {
    cfg.validate();
    cfg.net.styles = data && !data->styles.empty() ? data->styles.size() : 1;
    return cfg;
}

}  // namespace

net::Motion to_motion(const bvh::MotionClip& clip) { return {clip.motion_matrix(), clip.mask}; }

Dataset make_dataset(const std::vector<bvh::MotionClip>& clips) {
    if (clips.empty()) throw DataError("dataset is empty");
    Dataset ds;
    for (const auto& c : clips) {
        if (!c.style_label) throw DataError("clip " + c.source + " has no style label");
        ds.styles.push_back(*c.style_label);
        ds.contents.push_back(c.content_label.value_or(kUnlabelled));
    }
    for (auto* list : {&ds.styles, &ds.contents}) {
        std::sort(list->begin(), list->end());
        list->erase(std::unique(list->begin(), list->end()), list->end());
    }
    for (const auto& c : clips) {
        if (c.length() != clips[0].length() || c.joints() != clips[0].joints() || c.channels() != clips[0].channels())
            throw DataError("clip " + c.source + " does not share the dataset's length and joint count");
        ds.samples.push_back(
            {to_motion(c), index_of(ds.styles, *c.style_label), index_of(ds.contents, c.content_label.value_or(kUnlabelled))});
    }
    return ds;
}

std::string loss_log_header() { return "iter,adv_G,adv_D,r1,ss,sgn,recon,cyc_c,cyc_s,align,total_G,total_D\n"; }

std::string loss_log_row(std::size_t iteration, const LossReport& r) {
    std::string row = std::to_string(iteration);
    for (double v : {r.adv_g, r.adv_d, r.r1, r.ss, r.sgn, r.recon, r.cyc_c, r.cyc_s, r.align, r.total_g, r.total_d}) {
        char buf[40];
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        row += buf;
    }
    return row + "\n";
}

Trainer::Trainer(TrainConfig cfg, std::shared_ptr<const Dataset> data)
    : cfg_(prepare(std::move(cfg), data)),
      data_(std::move(data)),
      g_(cfg_.net),
      d_(cfg_.net),
      opt_g_(make_adam(g_.parameters(), cfg_, cfg_.lr_g)),
      opt_d_(make_adam(d_.parameters(), cfg_, cfg_.lr_d)) {
    if (!data_ || data_->samples.empty()) throw DataError("training needs a nonempty dataset");
    for (const auto& s : data_->samples) {
        if (s.motion.values.shape() != Shape{cfg_.net.clip_length, cfg_.net.motion_width()})
            throw DataError("dataset clips are " + shape_str(s.motion.values.shape()) + " but the config expects [" +
                            std::to_string(cfg_.net.clip_length) + " x " + std::to_string(cfg_.net.motion_width()) +
                            "]");
        if (s.style >= cfg_.net.styles) throw DataError("sample style index out of range");
    }
}

Rng Trainer::iteration_rng(std::uint64_t seed, std::size_t iteration) {
    std::uint64_t it = iteration;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(it), static_cast<std::uint32_t>(it >> 32), 0x7a11u};
    return Rng(seq);
}

Batch Trainer::sample_batch(Rng& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, data_->samples.size() - 1);
    Batch b;
    for (std::size_t i = 0; i < cfg_.batch_size; ++i) {
        std::size_t c = pick(rng);
        std::size_t s = pick(rng);
        b.emplace_back(c, s);
    }
    return b;
}

DLosses Trainer::d_losses(const Batch& batch, Rng& rng) const {
    const auto& samples = data_->samples;
    Tensor adv = Tensor::scalar(0.0), r1 = Tensor::scalar(0.0), sgn = Tensor::scalar(0.0), ss = Tensor::scalar(0.0);
    for (auto [ci, si] : batch) {
        const Sample& c = samples.at(ci);
        const Sample& s = samples.at(si);
        Tensor fake;
        {
            NoGradGuard guard;
            fake = g_.generate(c.motion, s.motion).m_g.detach();
        }
        Tensor real_in = s.motion.values.detach();
        if (cfg_.r1_gamma > 0) real_in.set_requires_grad();
        net::DiscOutput dr = d_.discriminate({real_in, s.motion.mask});
        net::DiscOutput df = d_.discriminate({fake, c.motion.mask});
        Tensor real_logit = class_logit(dr.logits, s.style);
        adv = add(adv, adversarial_d(real_logit, class_logit(df.logits, s.style)));
        if (cfg_.r1_gamma > 0) r1 = add(r1, r1_penalty(real_logit, real_in, cfg_.r1_gamma));
        if (cfg_.use_mcr_sgn) sgn = add(sgn, loss_sgn(d_, df.z, c.motion.mask, dr.z, s.motion.mask));
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    DLosses out;
    out.adv = mul(adv, inv);
    out.r1 = mul(r1, inv);
    out.sgn = mul(sgn, inv);
    // crops are drawn last so that the other terms never depend on them
    std::size_t used = 0;
    if (cfg_.use_mcr_ss) {
        for (auto [ci, si] : batch) {
            auto crops = net::random_crop_pair(samples.at(si).motion, rng, cfg_.effective_crop_min());
            if (!crops) {
                ++out.ss_skipped;
                continue;
            }
            ss = add(ss, loss_ss(d_, *crops));
            ++used;
        }
    }
    out.ss = used ? mul(ss, 1.0 / static_cast<double>(used)) : ss;
    out.total = add(add(out.adv, out.r1), mul(add(out.ss, out.sgn), cfg_.lambda_mcr));
    return out;
}

GLosses Trainer::g_losses(const Batch& batch) const {
    const auto& samples = data_->samples;
    Tensor adv = Tensor::scalar(0.0), recon = Tensor::scalar(0.0), cyc_c = Tensor::scalar(0.0),
           cyc_s = Tensor::scalar(0.0), align = Tensor::scalar(0.0);
    for (auto [ci, si] : batch) {
        const Sample& c = samples.at(ci);
        const Sample& s = samples.at(si);
        net::GenOutput out = g_.generate(c.motion, s.motion);
        net::Motion mg{out.m_g, c.motion.mask};
        FrameMask both = intersect(c.motion.mask, s.motion.mask);

        adv = add(adv, adversarial_g(class_logit(d_.discriminate(mg).logits, s.style)));
        recon = add(recon, masked_mse(g_.generate(c.motion, c.motion).m_g, c.motion.values, c.motion.mask));
        cyc_c = add(cyc_c, masked_mse(g_.encode_content(mg), out.e_c, c.motion.mask));
        net::Motion restyled{g_.generate(mg, s.motion).m_g, c.motion.mask};
        cyc_s = add(cyc_s, masked_mse(g_.encode_style(restyled), out.e_s, both));
        if (cfg_.use_style_align) align = add(align, loss_style_align(g_.encode_style(mg), out.e_s, both));
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    GLosses g;
    g.adv = mul(adv, inv);
    g.recon = mul(recon, inv);
    g.cyc_c = mul(cyc_c, inv);
    g.cyc_s = mul(cyc_s, inv);
    g.align = mul(align, inv);
    g.total = add(add(add(g.adv, mul(g.recon, cfg_.lambda_r)), mul(add(g.cyc_c, g.cyc_s), cfg_.lambda_c)),
                  mul(g.align, cfg_.lambda_a));
    return g;
}

LossReport Trainer::step() {
    Rng rng = iteration_rng(cfg_.seed, iteration_);
    Batch batch = sample_batch(rng);
    return step(batch, rng);
}

LossReport Trainer::step(const Batch& batch, Rng& rng) {
    LossReport r;

    opt_d_.zero_grad();
    opt_g_.zero_grad();
    DLosses dl = d_losses(batch, rng);
    for (auto [name, t] : {std::pair{"adv_D", &dl.adv}, std::pair{"r1", &dl.r1}, std::pair{"ss", &dl.ss},
                           std::pair{"sgn", &dl.sgn}, std::pair{"total_D", &dl.total}})
        check_finite(name, *t, iteration_);
    backward(dl.total);
    if (cfg_.grad_clip > 0) clip_grad_norm(opt_d_.params(), cfg_.grad_clip);
    opt_d_.step();
    r.adv_d = dl.adv.item();
    r.r1 = dl.r1.item();
    r.ss = dl.ss.item();
    r.sgn = dl.sgn.item();
    r.total_d = dl.total.item();
    r.ss_skipped = dl.ss_skipped;

    opt_d_.zero_grad();
    opt_g_.zero_grad();
    GLosses gl = g_losses(batch);
    for (auto [name, t] : {std::pair{"adv_G", &gl.adv}, std::pair{"recon", &gl.recon}, std::pair{"cyc_c", &gl.cyc_c},
                           std::pair{"cyc_s", &gl.cyc_s}, std::pair{"align", &gl.align},
                           std::pair{"total_G", &gl.total}})
        check_finite(name, *t, iteration_);
    backward(gl.total);
    opt_d_.zero_grad();
    if (cfg_.grad_clip > 0) clip_grad_norm(opt_g_.params(), cfg_.grad_clip);
    opt_g_.step();
    opt_g_.zero_grad();
    r.adv_g = gl.adv.item();
    r.recon = gl.recon.item();
    r.cyc_c = gl.cyc_c.item();
    r.cyc_s = gl.cyc_s.item();
    r.align = gl.align.item();
    r.total_g = gl.total.item();

    ++iteration_;
    if (iteration_ % cfg_.log_interval == 0) log_ += loss_log_row(iteration_, r);
    return r;
}

net::Checkpoint Trainer::checkpoint() const {
    net::Checkpoint ck;
    ck.config_text = dump_config(cfg_);
    ck.config_hash = config_hash(cfg_);
    ck.iteration = iteration_;
    ck.meta = {{"styles", join_lines(data_->styles)}, {"contents", join_lines(data_->contents)}, {"log", log_}};
    net::store_params(ck, g_.parameters(), "G/");
    net::store_params(ck, d_.parameters(), "D/");
    store_adam(ck, opt_g_, "optG/");
    store_adam(ck, opt_d_, "optD/");
    return ck;
}

void Trainer::restore(const net::Checkpoint& ck, bool force) {
    net::check_config_hash(ck, config_hash(cfg_), force);
    const std::string* styles = ck.meta_value("styles");
    if (!styles || split_lines(*styles) != data_->styles)
        throw DataError("checkpoint was trained on different style labels");
    net::load_params(ck, g_.parameters(), "G/");
    net::load_params(ck, d_.parameters(), "D/");
    load_adam(ck, opt_g_, "optG/");
    load_adam(ck, opt_d_, "optD/");
    iteration_ = ck.iteration;
    const std::string* log = ck.meta_value("log");
    log_ = log ? *log : std::string();
}

void train(Trainer& trainer, const TrainOptions& options) {
    const TrainConfig& cfg = trainer.config();
    auto write_log = [&] {
        if (options.log_path) net::atomic_write(*options.log_path, loss_log_header() + trainer.log_text());
    };
    auto write_checkpoint = [&] {
        if (options.checkpoint_path) net::write_checkpoint(trainer.checkpoint(), *options.checkpoint_path);
    };
    while (trainer.iteration() < cfg.iterations) {
        LossReport r = trainer.step();
        std::size_t it = trainer.iteration();
        if (options.on_step) options.on_step(it, r);
        if (it % cfg.log_interval == 0) write_log();
        if (cfg.checkpoint_interval && it % cfg.checkpoint_interval == 0 && it != cfg.iterations) write_checkpoint();
    }
    write_log();
    write_checkpoint();
}

LoadedModel load_model(const net::Checkpoint& ck) {
    LoadedModel m;
    m.config = parse_config(ck.config_text);
    if (config_hash(m.config) != ck.config_hash) throw DataError("checkpoint config text does not match its hash");
    const std::string* styles = ck.meta_value("styles");
    const std::string* contents = ck.meta_value("contents");
    if (!styles) throw DataError("checkpoint has no style labels");
    m.styles = split_lines(*styles);
    if (contents) m.contents = split_lines(*contents);
    m.config.net.styles = std::max<std::size_t>(1, m.styles.size());
    m.generator = std::make_unique<net::Generator>(m.config.net);
    net::load_params(ck, m.generator->parameters(), "G/");
    return m;
}

}  // namespace astf::train
