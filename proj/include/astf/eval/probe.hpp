#pragma once

#include <cstdint>
#include <vector>

#include "astf/net/networks.hpp"
#include "astf/numerics/nn.hpp"
#include "astf/numerics/tensor.hpp"

namespace astf::eval {

struct ProbeConfig {
    std::size_t hidden = 32;
    std::size_t feature_width = 16;
    std::size_t epochs = 150;
    std::size_t batch_size = 8;
    double lr = 3e-3;
    double holdout = 0.2;  // fraction of each class kept out of training
    std::uint64_t seed = 1;
};

// Two temporal convolutions, masked mean pooling, a feature layer and a
// linear head. The feature layer is the space Fréchet distances are taken in.
class ProbeClassifier {
public:
    ProbeClassifier(std::size_t input_width, std::size_t classes, const ProbeConfig& cfg);

    Tensor features(const net::Motion& m) const;  // [1 x feature_width]
    Tensor logits(const net::Motion& m) const;    // [1 x classes]
    std::size_t predict(const net::Motion& m) const;
    std::vector<std::size_t> predict(const std::vector<net::Motion>& ms) const;

    std::size_t classes() const { return classes_; }
    std::size_t feature_width() const { return feature_.out_features(); }
    nn::ParamSet parameters() const;

private:
    std::size_t classes_;
    net::TemporalConv conv1_, conv2_;
    nn::Linear feature_, head_;
};

struct ProbeResult {
    ProbeClassifier classifier;
    double train_accuracy = 0;
    double holdout_accuracy = 0;  // NaN-free; equals train accuracy when nothing is held out
    std::size_t held_out = 0;
};

// Needs at least 2 classes with at least 4 samples each.
ProbeResult train_probe_classifier(const std::vector<net::Motion>& motions, const std::vector<std::size_t>& labels,
                                   std::size_t classes, const ProbeConfig& cfg = {});

double accuracy(const ProbeClassifier& clf, const std::vector<net::Motion>& motions,
                const std::vector<std::size_t>& labels);

}  // namespace astf::eval
