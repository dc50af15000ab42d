#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/sfda/sfda.hpp"

namespace genaug::sfda {

namespace fs = std::filesystem;
using namespace genaug::nn;

ClassifierModel::ClassifierModel(const ClassifierConfig& cfg) : cfg_(cfg) {
    Rng rng(cfg_.init_seed);
    int in_ch = 3;
    int ch = cfg_.base_channels;
    int res = cfg_.image_size;
    int idx = 0;
    while (res > 4) {
        Conv c;
        std::string p = "clf.c" + std::to_string(idx) + ".";
        c.w = params_.add(p + "w", randn_tensor({ch, in_ch, 3, 3}, rng,
                                                std::sqrt(2.0f / static_cast<float>(in_ch * 9))));
        c.b = params_.add(p + "b", Tensor::zeros({ch}));
        convs_.push_back(c);
        in_ch = ch;
        ch *= 2;
        res /= 2;
        ++idx;
    }
    int flat = in_ch * res * res;
    fc1_w_ = params_.add("clf.fc1.w", randn_tensor({cfg_.feature_dim, flat}, rng,
                                                   std::sqrt(2.0f / static_cast<float>(flat))));
    fc1_b_ = params_.add("clf.fc1.b", Tensor::zeros({cfg_.feature_dim}));
    fc2_w_ = params_.add("clf.fc2.w",
                         randn_tensor({cfg_.classes, cfg_.feature_dim},
                                      rng, std::sqrt(1.0f / static_cast<float>(cfg_.feature_dim))));
    fc2_b_ = params_.add("clf.fc2.b", Tensor::zeros({cfg_.classes}));
}

ClassifierModel::FeatLogits ClassifierModel::features_and_logits(const Var& images) const {
    const Tensor& v = images.value();
    if (v.rank() != 4 || v.dim(1) != 3 || v.dim(2) != cfg_.image_size || v.dim(3) != cfg_.image_size)
        throw std::invalid_argument("classifier: expects [n,3,S,S], got " + v.shape_str());
    Var x = images;
    for (const Conv& c : convs_) {
        x = leaky_relu(conv2d(x, c.w, c.b, 1), 0.1f);
        x = avgpool2(x);
    }
    const Tensor& xv = x.value();
    Var flat = reshape(x, {xv.dim(0), xv.dim(1) * xv.dim(2) * xv.dim(3)});
    Var feat = leaky_relu(linear(flat, fc1_w_, fc1_b_), 0.1f);
    Var out = linear(feat, fc2_w_, fc2_b_);
    return {feat, out};
}

Var ClassifierModel::logits(const Var& images) const { return features_and_logits(images).logits; }

ClassifierModel ClassifierModel::clone() const {
    ClassifierModel m(cfg_);
    m.params_.copy_values_from(params_);
    return m;
}

void save_classifier(const ClassifierModel& model, const std::string& dir, const Manifest& extra) {
    fs::create_directories(dir);
    ParamArchive arch;
    model.store().save_into(arch);
    arch.save(dir + "/params.bin");
    Manifest m = extra;
    m["kind"] = "classifier";
    m["image_size"] = std::to_string(model.config().image_size);
    m["base_channels"] = std::to_string(model.config().base_channels);
    m["feature_dim"] = std::to_string(model.config().feature_dim);
    m["classes"] = std::to_string(model.config().classes);
    m["init_seed"] = std::to_string(model.config().init_seed);
    save_manifest(m, dir + "/manifest.txt");
}

ClassifierModel load_classifier(const std::string& dir, Manifest* manifest_out) {
    Manifest m = load_manifest(dir + "/manifest.txt");
    if (m.count("kind") && m.at("kind") != "classifier")
        throw std::runtime_error("checkpoint at " + dir + " is not a classifier");
    ClassifierConfig cfg;
    cfg.image_size = std::stoi(m.at("image_size"));
    cfg.base_channels = std::stoi(m.at("base_channels"));
    cfg.feature_dim = std::stoi(m.at("feature_dim"));
    cfg.classes = std::stoi(m.at("classes"));
    cfg.init_seed = std::stoull(m.at("init_seed"));
    ClassifierModel model(cfg);
    ParamArchive arch = ParamArchive::load(dir + "/params.bin");
    model.store().load_from(arch);
    if (manifest_out) *manifest_out = std::move(m);
    return model;
}

Tensor stack_images(const std::vector<Tensor>& images, int from, int count) {
    if (count <= 0 || from < 0 || from + count > static_cast<int>(images.size()))
        throw std::invalid_argument("stack_images: bad range");
    const Tensor& first = images[static_cast<size_t>(from)];
    Tensor out({count, first.dim(0), first.dim(1), first.dim(2)});
    for (int i = 0; i < count; ++i) {
        const Tensor& im = images[static_cast<size_t>(from + i)];
        if (!im.same_shape(first)) throw std::invalid_argument("stack_images: ragged image shapes");
        std::copy(im.data(), im.data() + im.size(), out.data() + static_cast<int64_t>(i) * im.size());
    }
    return out;
}

ClassifierModel train_source_classifier(const LabeledDataset& dataset, const std::string& task,
                                        const TrainClassifierConfig& cfg,
                                        double* val_accuracy_out) {
    int attr = dataset.attribute_index(task);
    int n = dataset.size();
    if (n < 2) throw std::invalid_argument("train_source_classifier: need at least two samples");

    int positives = 0;
    for (const auto& row : dataset.labels) positives += row[static_cast<size_t>(attr)];
    if (positives == 0 || positives == n)
        throw std::runtime_error("train_source_classifier: task '" + task +
                                 "' has single-class training labels");

    TrainClassifierConfig c = cfg;
    c.model.image_size = dataset.images[0].dim(1);
    c.model.init_seed = cfg.seed;
    ClassifierModel model(c.model);

    int n_val = std::max(1, static_cast<int>(std::lround(cfg.val_fraction * n)));
    int n_train = n - n_val;
    if (n_train < 1) throw std::invalid_argument("train_source_classifier: dataset too small");

    Adam opt(model.params(), cfg.lr);
    Rng rng(Rng::derive(cfg.seed, 0x7261696e));
    std::vector<int> order(static_cast<size_t>(n_train));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the deterministic stream.
        for (int i = n_train - 1; i > 0; --i) {
            int j = rng.uniform_int(0, i);
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }
        for (int start = 0; start < n_train; start += cfg.batch_size) {
            int b = std::min(cfg.batch_size, n_train - start);
            Tensor batch({b, 3, c.model.image_size, c.model.image_size});
            std::vector<int> labels(static_cast<size_t>(b));
            for (int i = 0; i < b; ++i) {
                int idx = order[static_cast<size_t>(start + i)];
                const Tensor& im = dataset.images[static_cast<size_t>(idx)];
                std::copy(im.data(), im.data() + im.size(),
                          batch.data() + static_cast<int64_t>(i) * im.size());
                labels[static_cast<size_t>(i)] = dataset.labels[static_cast<size_t>(idx)][static_cast<size_t>(attr)];
            }
            Var loss = softmax_cross_entropy(model.logits(constant(batch)), labels);
            if (!std::isfinite(loss.scalar()))
                throw std::runtime_error("train_source_classifier: non-finite loss");
            opt.zero_grad();
            backward(loss);
            opt.step();
        }
    }

    if (val_accuracy_out) {
        LabeledDataset val;
        val.attribute_names = dataset.attribute_names;
        for (int i = n_train; i < n; ++i) {
            val.images.push_back(dataset.images[static_cast<size_t>(i)]);
            val.labels.push_back(dataset.labels[static_cast<size_t>(i)]);
            val.split.push_back(shifts::SplitTag::kSource);
        }
        *val_accuracy_out = evaluate(model, val, task);
    }
    return model;
}

// Inference helpers run one image per forward pass: each sample's numbers
// are then independent of batch composition, so duplicates produce identical
// rows and results do not depend on how callers chunk the data.
Tensor extract_features(const ClassifierModel& model, const std::vector<Tensor>& images,
                        int /*batch_size*/) {
    int n = static_cast<int>(images.size());
    if (n == 0) throw std::invalid_argument("extract_features: no images");
    int fd = model.config().feature_dim;
    Tensor out({n, fd});
    for (int i = 0; i < n; ++i) {
        Var feats = model.features_and_logits(constant(stack_images(images, i, 1))).features;
        std::copy(feats.value().data(), feats.value().data() + fd,
                  out.data() + static_cast<int64_t>(i) * fd);
    }
    return out;
}

Tensor predict_probs(const ClassifierModel& model, const std::vector<Tensor>& images,
                     int /*batch_size*/) {
    int n = static_cast<int>(images.size());
    if (n == 0) throw std::invalid_argument("predict_probs: no images");
    int classes = model.config().classes;
    Tensor out({n, classes});
    for (int i = 0; i < n; ++i) {
        Var probs = softmax_rows(model.logits(constant(stack_images(images, i, 1))));
        std::copy(probs.value().data(), probs.value().data() + classes,
                  out.data() + static_cast<int64_t>(i) * classes);
    }
    return out;
}

double evaluate(const ClassifierModel& model, const LabeledDataset& dataset,
                const std::string& task, int batch_size) {
    if (dataset.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    int attr = dataset.attribute_index(task);
    Tensor probs = predict_probs(model, dataset.images, batch_size);
    int classes = model.config().classes;
    int correct = 0;
    for (int i = 0; i < dataset.size(); ++i) {
        int arg = 0;
        for (int c = 1; c < classes; ++c)
            if (probs.at(i, c) > probs.at(i, arg)) arg = c;
        if (arg == dataset.labels[static_cast<size_t>(i)][static_cast<size_t>(attr)]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / dataset.size();
}

}  // namespace genaug::sfda
