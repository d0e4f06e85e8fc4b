#include "astf/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "astf/error.hpp"
#include "astf/eval/metrics.hpp"
#include "astf/net/checkpoint.hpp"
#include "astf/numerics/autograd.hpp"

namespace astf::eval {

namespace {

std::vector<std::string> sorted_labels(const std::vector<std::optional<std::string>>& labels) {
    std::vector<std::string> out;
    for (const auto& l : labels)
        if (l) out.push_back(*l);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t index_of(const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
}

Eigen::MatrixXd feature_rows(const ProbeClassifier& clf, const std::vector<net::Motion>& ms) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ms.size()), static_cast<Eigen::Index>(clf.feature_width()));
    for (std::size_t i = 0; i < ms.size(); ++i) {
        Tensor feat = clf.features(ms[i]);
        auto v = feat.values();
        for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
    }
    return out;
}

}  // namespace

EvalResult evaluate(const train::LoadedModel& model, const std::vector<bvh::MotionClip>& clips,
                    const EvalOptions& opt) {
    if (!model.generator) throw ContractError("evaluate: model has no generator");
    if (clips.size() < 2) throw DataError("evaluate: needs at least 2 clips");
    const auto& nc = model.config.net;
    std::vector<net::Motion> real;
    std::vector<std::optional<std::string>> style_of, content_of;
    for (const auto& c : clips) {
        if (c.joints() != nc.joints || c.length() != nc.clip_length || c.channels() != nc.feature_channels)
            throw DimensionError("evaluate: clip " + c.source + " is " + shape_str(c.features.shape()) +
                                 ", the model expects " + std::to_string(nc.feature_channels) + "x" +
                                 std::to_string(nc.clip_length) + "x" + std::to_string(nc.joints));
        if (!c.style_label) throw DataError("evaluate: clip " + c.source + " has no style label");
        real.push_back(train::to_motion(c));
        style_of.push_back(c.style_label);
        content_of.push_back(c.content_label);
    }
    auto styles = sorted_labels(style_of);
    auto contents = sorted_labels(content_of);
    bool have_content = contents.size() >= 2 &&
                        std::all_of(content_of.begin(), content_of.end(), [](const auto& l) { return l.has_value(); });

    EvalResult r;
    NoGradGuard guard;
    std::size_t n = clips.size();
    std::vector<net::Motion> generated;
    std::vector<std::size_t> target_style, source_content;
    double geo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = (i + 1) % n;
        for (std::size_t k = 1; k < n; ++k) {
            std::size_t cand = (i + k) % n;
            if (*style_of[cand] != *style_of[i]) {
                s = cand;
                break;
            }
        }
        auto out = model.generator->generate(real[i], real[s]);
        generated.push_back({out.m_g, real[i].mask});
        target_style.push_back(index_of(styles, *style_of[s]));
        if (have_content) source_content.push_back(index_of(contents, *content_of[i]));
        geo += mean_geodesic(out.m_g, real[i].values, real[i].mask, nc.joints);
    }
    r.transfers = n;
    r.geo_dis = geo / static_cast<double>(n);

    if (styles.size() >= 2) {
        std::vector<std::size_t> y;
        for (const auto& l : style_of) y.push_back(index_of(styles, *l));
        ProbeResult probe = train_probe_classifier(real, y, styles.size(), opt.probe);
        r.style_acc = accuracy(probe.classifier, generated, target_style);
        r.style_fid = frechet_distance(FeatureDistribution::from_samples(feature_rows(probe.classifier, real)),
                                       FeatureDistribution::from_samples(feature_rows(probe.classifier, generated)));
    }
    if (have_content) {
        std::vector<std::size_t> y;
        for (const auto& l : content_of) y.push_back(index_of(contents, *l));
        ProbeResult probe = train_probe_classifier(real, y, contents.size(), opt.probe);
        r.content_acc = accuracy(probe.classifier, generated, source_content);
        r.content_fid = frechet_distance(FeatureDistribution::from_samples(feature_rows(probe.classifier, real)),
                                         FeatureDistribution::from_samples(feature_rows(probe.classifier, generated)));
    }
    return r;
}

std::string metrics_json(const EvalResult& r) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::ordered_json j;
    j["style_fid"] = opt(r.style_fid);
    j["content_fid"] = opt(r.content_fid);
    j["style_acc"] = opt(r.style_acc);
    j["content_acc"] = opt(r.content_acc);
    j["geo_dis"] = r.geo_dis;
    j["transfers"] = r.transfers;
    return j.dump(2) + "\n";
}

void write_metrics_json(const std::filesystem::path& path, const EvalResult& r) {
    net::atomic_write(path, metrics_json(r));
}

}  // namespace astf::eval
