#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genaug/nn/ops.hpp"
#include "genaug/nn/params.hpp"
#include "genaug/shifts/shifts.hpp"

namespace genaug::sfda {

using nn::Tensor;
using nn::Var;
using shifts::LabeledDataset;

struct ClassifierConfig {
    int image_size = 32;
    int base_channels = 8;
    int feature_dim = 48;
    int classes = 2;
    uint64_t init_seed = 3;

    bool operator==(const ClassifierConfig&) const = default;
};

// Small CNN: three conv/pool stages, a feature layer, and a linear head.
// The penultimate feature layer is what the neighborhood machinery sees.
class ClassifierModel {
public:
    explicit ClassifierModel(const ClassifierConfig& cfg);

    const ClassifierConfig& config() const { return cfg_; }

    Var logits(const Var& images) const;
    struct FeatLogits {
        Var features;  // [n, feature_dim]
        Var logits;    // [n, classes]
    };
    FeatLogits features_and_logits(const Var& images) const;

    std::vector<Var> params() const { return params_.vars(); }
    std::vector<Var> head_params() const { return {fc2_w_, fc2_b_}; }
    const nn::ParamStore& store() const { return params_; }
    nn::ParamStore& store() { return params_; }

    ClassifierModel clone() const;

private:
    ClassifierConfig cfg_;
    nn::ParamStore params_;
    struct Conv {
        Var w, b;
    };
    std::vector<Conv> convs_;
    Var fc1_w_, fc1_b_;  // feature layer
    Var fc2_w_, fc2_b_;  // head
};

void save_classifier(const ClassifierModel& model, const std::string& dir,
                     const nn::Manifest& extra = {});
ClassifierModel load_classifier(const std::string& dir, nn::Manifest* manifest_out = nullptr);

// Stacks [3,S,S] images into an [n,3,S,S] input tensor.
Tensor stack_images(const std::vector<Tensor>& images, int from, int count);

struct TrainClassifierConfig {
    int epochs = 30;
    double lr = 1e-4;
    int batch_size = 32;
    double val_fraction = 0.1;
    uint64_t seed = 0;
    ClassifierConfig model;
};

// Cross-entropy training of the per-attribute source classifier. Throws if
// the training labels are single-class.
ClassifierModel train_source_classifier(const LabeledDataset& dataset, const std::string& task,
                                        const TrainClassifierConfig& cfg,
                                        double* val_accuracy_out = nullptr);

// Penultimate-layer features, one row per image.
Tensor extract_features(const ClassifierModel& model, const std::vector<Tensor>& images,
                        int batch_size = 64);
// Top-k neighbor lists under cosine similarity, self excluded; the graph the
// adaptation loop uses each epoch.
std::vector<std::vector<int>> knn_cosine_graph(const Tensor& features, int k);
// Row-wise class probabilities.
Tensor predict_probs(const ClassifierModel& model, const std::vector<Tensor>& images,
                     int batch_size = 64);

struct AdaptConfig {
    int k = 5;
    int k_expanded = 5;
    double lr = 1e-3;
    double momentum = 0.9;
    int epochs = 10;
    int batch_size = 64;
    double diversity_weight = 1.0;
    uint64_t rng_seed = 0;
};

// Neighborhood-consistency source-free adaptation: every epoch the feature
// k-NN graph is rebuilt, each sample is pulled toward the affinity-weighted
// average prediction of its (reciprocal-weighted) neighbors plus their
// expanded neighbors, and a diversity regularizer keeps the batch-mean
// prediction spread out. The consistency term is the KL divergence from the
// snapshot target to the live prediction. The input model is not modified.
// consistency_log, when given, receives the per-batch consistency values.
ClassifierModel nrc_adapt(const ClassifierModel& model, const std::vector<Tensor>& images,
                          const AdaptConfig& cfg, std::vector<double>* consistency_log = nullptr);

enum class AugPool { kMixlike, kRandConv, kIdentity };

std::string to_string(AugPool p);
AugPool aug_pool_from_string(const std::string& s);

struct MemoConfig {
    int n_aug = 32;
    int steps = 1;
    double lr = 1e-4;
    AugPool pool = AugPool::kMixlike;
    bool adapt_all = true;  // false adapts the linear head only
    uint64_t rng_seed = 0;
};

struct MemoResult {
    int predicted = 0;
    std::vector<double> probabilities;
    double entropy_before = 0.0;
    double entropy_after = 0.0;
};

// Episodic test-time adaptation of a per-image model clone by minimizing the
// entropy of the mean prediction over augmented copies.
MemoResult memo_adapt(const ClassifierModel& model, const Tensor& image, const MemoConfig& cfg);

// One deterministic augmented copy (index selects the draw).
Tensor augment_image(const Tensor& image, AugPool pool, uint64_t seed, int copy_index);

// Accuracy in [0, 100] of argmax predictions on the named attribute.
double evaluate(const ClassifierModel& model, const LabeledDataset& dataset,
                const std::string& task, int batch_size = 64);

}  // namespace genaug::sfda
