#include "astf/eval/separation.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "astf/error.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/stats/moments.hpp"

namespace astf::eval {

namespace {

using stats::Stat;

struct Standardizer {
    Eigen::RowVectorXd mean, scale;

    explicit Standardizer(const Eigen::MatrixXd& x) {
        mean = x.colwise().mean();
        Eigen::MatrixXd c = x.rowwise() - mean;
        scale = (c.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
        for (Eigen::Index k = 0; k < scale.size(); ++k)
            if (!(scale[k] > 1e-12)) scale[k] = 1.0;
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
    }
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd p = z.colwise() - z.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    Eigen::VectorXd s = p.rowwise().sum();
    return p.array().colwise() / s.array();
}

// Full-batch gradient descent with a step from the curvature bound, so the
// result is deterministic and the iteration cannot diverge.
struct Logistic {
    Eigen::MatrixXd w;
    Eigen::RowVectorXd b;

    void fit(const Eigen::MatrixXd& x, const std::vector<std::size_t>& y, std::size_t classes, double l2,
             std::size_t iterations) {
        auto n = static_cast<double>(x.rows());
        w = Eigen::MatrixXd::Zero(x.cols(), static_cast<Eigen::Index>(classes));
        b = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(classes));
        Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(x.rows(), static_cast<Eigen::Index>(classes));
        for (Eigen::Index i = 0; i < x.rows(); ++i) onehot(i, static_cast<Eigen::Index>(y[i])) = 1.0;
        Eigen::MatrixXd xb(x.rows(), x.cols() + 1);
        xb << x, Eigen::VectorXd::Ones(x.rows());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xb.transpose() * xb / n, Eigen::EigenvaluesOnly);
        double step = 1.0 / (0.5 * es.eigenvalues().maxCoeff() + l2);
        for (std::size_t it = 0; it < iterations; ++it) {
            Eigen::MatrixXd p = softmax_rows((x * w).rowwise() + b);
            Eigen::MatrixXd r = (p - onehot) / n;
            w -= step * (x.transpose() * r + l2 * w);
            b -= step * r.colwise().sum();
        }
    }

    std::vector<std::size_t> predict(const Eigen::MatrixXd& x) const {
        Eigen::MatrixXd z = (x * w).rowwise() + b;
        std::vector<std::size_t> out(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            Eigen::Index arg;
            z.row(i).maxCoeff(&arg);
            out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(arg);
        }
        return out;
    }
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

Eigen::MatrixXd clip_descriptors(const std::vector<bvh::MotionClip>& clips, bool four_moments) {
    if (clips.empty()) throw ContractError("clip_descriptors: no clips");
    std::vector<Stat> which = {Stat::Mean, Stat::Variance};
    if (four_moments) {
        which.push_back(Stat::Skewness);
        which.push_back(Stat::Kurtosis);
    }
    std::size_t per_stat = clips.front().channels() * clips.front().joints();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(clips.size()), static_cast<Eigen::Index>(per_stat * which.size()));
    NoGradGuard guard;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto& c = clips[i];
        if (c.channels() * c.joints() != per_stat) throw DimensionError("clip_descriptors: clips differ in layout");
        stats::StatTuple t = stats::frame_statistics(c.features, c.mask);
        for (std::size_t s = 0; s < which.size(); ++s) {
            auto v = t.get(which[s]).values();
            for (std::size_t k = 0; k < per_stat; ++k)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s * per_stat + k)) = v[k];
        }
    }
    return out;
}

double cv_probe_accuracy(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels, std::size_t classes,
                         const SeparationOptions& opt) {
    if (static_cast<std::size_t>(x.rows()) != labels.size()) throw DimensionError("cv_probe_accuracy: label count");
    if (opt.folds < 2) throw ContractError("cv_probe_accuracy: need at least 2 folds");
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class.at(labels[i]).push_back(i);
    // identical rows share a fold, otherwise a duplicate leaks into training
    std::map<std::vector<double>, std::size_t> group_fold;
    Rng rng(opt.seed);
    std::vector<std::size_t> fold(labels.size());
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t next = 0;
        for (std::size_t i : members) {
            Eigen::RowVectorXd row = x.row(static_cast<Eigen::Index>(i));
            std::vector<double> key(row.data(), row.data() + row.size());
            auto [it, fresh] = group_fold.emplace(std::move(key), next % opt.folds);
            if (fresh) ++next;
            fold[i] = it->second;
        }
    }
    std::size_t correct = 0, tested = 0;
    for (std::size_t f = 0; f < opt.folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(i);
        if (test.empty() || train.empty()) continue;
        Eigen::MatrixXd xtr = rows_of(x, train);
        Standardizer st(xtr);
        std::vector<std::size_t> ytr;
        for (std::size_t i : train) ytr.push_back(labels[i]);
        Logistic model;
        model.fit(st.apply(xtr), ytr, classes, opt.l2, opt.iterations);
        auto pred = model.predict(st.apply(rows_of(x, test)));
        for (std::size_t k = 0; k < test.size(); ++k) correct += pred[k] == labels[test[k]];
        tested += test.size();
    }
    return tested ? static_cast<double>(correct) / static_cast<double>(tested) : 0.0;
}

double silhouette_score(const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels) {
    std::size_t n = labels.size();
    if (static_cast<std::size_t>(x.rows()) != n) throw DimensionError("silhouette_score: label count");
    std::size_t classes = 0;
    for (auto l : labels) classes = std::max(classes, l + 1);
    std::vector<std::size_t> sizes(classes, 0);
    for (auto l : labels) ++sizes[l];
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> dist_sum(classes, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dist_sum[labels[j]] += (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
        std::size_t own = labels[i];
        if (sizes[own] <= 1) continue;
        double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < classes; ++c)
            if (c != own && sizes[c] > 0) b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
        if (!std::isfinite(b)) continue;
        double m = std::max(a, b);
        total += m > 0 ? (b - a) / m : 0.0;
    }
    return n ? total / static_cast<double>(n) : 0.0;
}

SeparationReport separation_report(const std::vector<bvh::MotionClip>& clips, const SeparationOptions& opt) {
    SeparationReport r;
    for (const auto& c : clips) {
        if (!c.style_label) throw DataError("separation_report: clip " + c.source + " has no style label");
        r.styles.push_back(*c.style_label);
    }
    std::sort(r.styles.begin(), r.styles.end());
    r.styles.erase(std::unique(r.styles.begin(), r.styles.end()), r.styles.end());
    if (r.styles.size() < 2) throw ContractError("separation_report: needs at least 2 styles");
    std::vector<std::size_t> labels;
    for (const auto& c : clips)
        labels.push_back(static_cast<std::size_t>(std::lower_bound(r.styles.begin(), r.styles.end(), *c.style_label) -
                                                  r.styles.begin()));
    r.samples = clips.size();

    Eigen::MatrixXd two = clip_descriptors(clips, false);
    Eigen::MatrixXd four = clip_descriptors(clips, true);
    r.accuracy_two = cv_probe_accuracy(two, labels, r.styles.size(), opt);
    r.accuracy_four = cv_probe_accuracy(four, labels, r.styles.size(), opt);
    r.silhouette_two = silhouette_score(Standardizer(two).apply(two), labels);
    r.silhouette_four = silhouette_score(Standardizer(four).apply(four), labels);

    r.centroids = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r.styles.size()), four.cols());
    std::vector<double> count(r.styles.size(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        r.centroids.row(static_cast<Eigen::Index>(labels[i])) += four.row(static_cast<Eigen::Index>(i));
        count[labels[i]] += 1;
    }
    for (std::size_t s = 0; s < count.size(); ++s) r.centroids.row(static_cast<Eigen::Index>(s)) /= count[s];
    return r;
}

void write_descriptor_csv(std::ostream& out, const std::vector<bvh::MotionClip>& clips) {
    NoGradGuard guard;
    std::vector<stats::StatRow> rows;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto& c = clips[i];
        std::string id = c.source.empty() ? "clip" + std::to_string(i) : c.source;
        auto part = stats::stat_rows(id, c.style_label, stats::frame_statistics(c.features, c.mask));
        rows.insert(rows.end(), part.begin(), part.end());
    }
    stats::write_stats_csv(out, rows);
}

std::vector<bvh::MotionClip> synthetic_skew_corpus(std::size_t per_style, std::size_t frames, std::size_t joints,
                                                   std::uint64_t seed) {
    std::vector<bvh::MotionClip> out;
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    std::size_t d = bvh::kFeatureChannels;
    for (std::size_t k = 0; k < per_style; ++k)
        for (std::size_t style = 0; style < 2; ++style) {
            std::vector<double> v(d * frames * joints);
            for (std::size_t c = 0; c < d; ++c)
                for (std::size_t j = 0; j < joints; ++j) {
                    double m = gauss(rng), s = scale(rng);
                    for (std::size_t f = 0; f < frames; ++f) {
                        double x = style == 0 ? gauss(rng) : expo(rng) - 1.0;
                        v[(c * frames + f) * joints + j] = m + s * x;
                    }
                }
            bvh::MotionClip clip;
            clip.features = Tensor({d, frames, joints}, std::move(v));
            clip.mask = FrameMask::all(frames);
            clip.style_label = style == 0 ? "symmetric" : "skewed";
            clip.source = "skew/" + *clip.style_label + "_" + std::to_string(k);
            out.push_back(std::move(clip));
        }
    return out;
}

}  // namespace astf::eval
