#include "astf/eval/probe.hpp"

#include <algorithm>
#include <random>

#include "astf/error.hpp"
#include "astf/eval/metrics.hpp"
#include "astf/numerics/autograd.hpp"
#include "astf/numerics/ops.hpp"
#include "astf/numerics/optim.hpp"

namespace astf::eval {

ProbeClassifier::ProbeClassifier(std::size_t input_width, std::size_t classes, const ProbeConfig& cfg)
    : classes_(classes),
      conv1_(input_width, cfg.hidden, "probe.conv1", cfg.seed),
      conv2_(cfg.hidden, cfg.hidden, "probe.conv2", cfg.seed),
      feature_(cfg.hidden, cfg.feature_width, "probe.feature", cfg.seed),
      head_(cfg.feature_width, classes, "probe.head", cfg.seed) {}

Tensor ProbeClassifier::features(const net::Motion& m) const {
    if (m.mask.valid_count() == 0) throw ContractError("probe: all frames are masked");
    Tensor mask = m.mask.column();
    Tensor h = mul(leaky_relu(conv1_.forward(mul(m.values, mask)), nn::kLeakySlope), mask);
    h = mul(leaky_relu(conv2_.forward(h), nn::kLeakySlope), mask);
    Tensor pooled = mul(sum(h, 0, true), 1.0 / static_cast<double>(m.mask.valid_count()));
    return leaky_relu(feature_.forward(pooled), nn::kLeakySlope);
}

Tensor ProbeClassifier::logits(const net::Motion& m) const { return head_.forward(features(m)); }

std::size_t ProbeClassifier::predict(const net::Motion& m) const {
    NoGradGuard guard;
    Tensor z = logits(m);
    auto v = z.values();
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<std::size_t> ProbeClassifier::predict(const std::vector<net::Motion>& ms) const {
    std::vector<std::size_t> out;
    for (const auto& m : ms) out.push_back(predict(m));
    return out;
}

nn::ParamSet ProbeClassifier::parameters() const {
    nn::ParamSet p;
    conv1_.collect(p);
    conv2_.collect(p);
    feature_.collect(p);
    head_.collect(p);
    return p;
}

ProbeResult train_probe_classifier(const std::vector<net::Motion>& motions, const std::vector<std::size_t>& labels,
                                   std::size_t classes, const ProbeConfig& cfg) {
    if (motions.size() != labels.size()) throw DimensionError("probe: motions and labels differ in count");
    if (classes < 2) throw ContractError("probe: needs at least 2 classes");
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= classes) throw ContractError("probe: label out of range");
        by_class[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < classes; ++c)
        if (by_class[c].size() < 4)
            throw ContractError("probe: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                                " samples, at least 4 are needed");

    Rng rng(cfg.seed);
    std::vector<std::size_t> train_idx, held_idx;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        auto keep = static_cast<std::size_t>(cfg.holdout * static_cast<double>(members.size()));
        keep = std::min(keep, members.size() - 2);
        held_idx.insert(held_idx.end(), members.begin(), members.begin() + static_cast<long>(keep));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<long>(keep), members.end());
    }

    ProbeResult result{ProbeClassifier(motions.front().values.dim(1), classes, cfg)};
    const ProbeClassifier& clf = result.classifier;
    AdamOptions ao;
    ao.lr = cfg.lr;
    Adam opt(clf.parameters(), ao);
    std::size_t bs = std::max<std::size_t>(1, cfg.batch_size);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        for (std::size_t start = 0; start < train_idx.size(); start += bs) {
            std::size_t end = std::min(train_idx.size(), start + bs);
            opt.zero_grad();
            Tensor loss = Tensor::scalar(0.0);
            for (std::size_t k = start; k < end; ++k) {
                std::size_t i = train_idx[k];
                Tensor lp = log_softmax(clf.logits(motions[i]), 1);
                loss = sub(loss, reshape(slice(lp, 1, labels[i], labels[i] + 1), {}));
            }
            backward(mul(loss, 1.0 / static_cast<double>(end - start)));
            opt.step();
        }
    }
    opt.zero_grad();

    auto subset_acc = [&](const std::vector<std::size_t>& idx) {
        std::vector<net::Motion> ms;
        std::vector<std::size_t> ls;
        for (std::size_t i : idx) {
            ms.push_back(motions[i]);
            ls.push_back(labels[i]);
        }
        return accuracy(clf, ms, ls);
    };
    result.train_accuracy = subset_acc(train_idx);
    result.held_out = held_idx.size();
    result.holdout_accuracy = held_idx.empty() ? result.train_accuracy : subset_acc(held_idx);
    return result;
}

double accuracy(const ProbeClassifier& clf, const std::vector<net::Motion>& motions,
                const std::vector<std::size_t>& labels) {
    return accuracy(clf.predict(motions), labels);
}

}  // namespace astf::eval
