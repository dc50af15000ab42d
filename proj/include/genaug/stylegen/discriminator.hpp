#pragma once

#include <cstdint>
#include <vector>

#include "genaug/nn/ops.hpp"
#include "genaug/nn/params.hpp"

namespace genaug::stylegen {

struct DiscriminatorConfig {
    int image_size = 32;
    int base_channels = 24;
    uint64_t init_seed = 2;

    bool operator==(const DiscriminatorConfig&) const = default;
};

// Conv stack with one registered feature layer per resolution; the feature
// list order is fixed at construction (coarse-to-fine input order).
class DiscriminatorModel {
public:
    explicit DiscriminatorModel(const DiscriminatorConfig& cfg);

    const DiscriminatorConfig& config() const { return cfg_; }
    int feature_layer_count() const { return static_cast<int>(convs_.size()); }

    // images [n,3,S,S] -> logits [n,1]
    nn::Var logits(const nn::Var& images) const;
    // images [n,3,S,S] -> one Var per registered feature layer
    std::vector<nn::Var> features(const nn::Var& images) const;

    std::vector<nn::Var> params() const { return params_.vars(); }
    const nn::ParamStore& store() const { return params_; }
    nn::ParamStore& store() { return params_; }

    DiscriminatorModel clone() const;

private:
    std::vector<nn::Var> trunk(const nn::Var& images) const;

    DiscriminatorConfig cfg_;
    nn::ParamStore params_;
    struct Conv {
        nn::Var w, b;
    };
    std::vector<Conv> convs_;
    nn::Var fc_w_, fc_b_;
};

// Per-layer feature tensors for a single [3,S,S] image.
std::vector<nn::Tensor> disc_features(const DiscriminatorModel& disc, const nn::Tensor& image);

}  // namespace genaug::stylegen
