#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "genaug/nn/rng.hpp"
#include "genaug/sfda/sfda.hpp"

using namespace genaug;
using namespace genaug::sfda;
using nn::Rng;
using nn::Tensor;
using shifts::LabeledDataset;
using shifts::SplitTag;

namespace {

ClassifierConfig tiny_clf_config() {
    ClassifierConfig cfg;
    cfg.image_size = 16;
    cfg.base_channels = 4;
    cfg.feature_dim = 8;
    cfg.init_seed = 9;
    return cfg;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// Constant-brightness images labeled by sign; linearly separable by any
// monotone brightness readout.
LabeledDataset brightness_dataset(int n, uint64_t seed, int s = 16) {
    LabeledDataset ds;
    ds.attribute_names = {"bright"};
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        double sign = (i % 2 == 0) ? 1.0 : -1.0;
        double c = sign * rng.uniform(0.1, 0.8);
        ds.images.push_back(Tensor::full({3, s, s}, static_cast<float>(c)));
        ds.labels.push_back({c > 0 ? 1 : 0});
        ds.split.push_back(SplitTag::kSource);
    }
    return ds;
}

// Hand-set monotone brightness classifier: averaging convolutions, an
// averaging feature layer, and a thresholded head calibrated at zero.
ClassifierModel ground_truth_brightness_model() {
    ClassifierConfig cfg = tiny_clf_config();
    ClassifierModel model(cfg);
    nn::ParamArchive arch;
    int in_ch = 3, ch = cfg.base_channels, res = cfg.image_size, idx = 0;
    while (res > 4) {
        Tensor w = Tensor::full({ch, in_ch, 3, 3}, 1.0f / static_cast<float>(in_ch * 9));
        arch.put("clf.c" + std::to_string(idx) + ".w", w);
        arch.put("clf.c" + std::to_string(idx) + ".b", Tensor::zeros({ch}));
        in_ch = ch;
        ch *= 2;
        res /= 2;
        ++idx;
    }
    int flat = in_ch * res * res;
    arch.put("clf.fc1.w", Tensor::full({cfg.feature_dim, flat}, 1.0f / static_cast<float>(flat)));
    arch.put("clf.fc1.b", Tensor::zeros({cfg.feature_dim}));
    arch.put("clf.fc2.w", Tensor::zeros({2, cfg.feature_dim}));
    arch.put("clf.fc2.b", Tensor::zeros({2}));
    model.store().load_from(arch);

    // Feature response of the zero image calibrates the decision threshold.
    Tensor zero({1, 3, cfg.image_size, cfg.image_size});
    Tensor feat0 = model.features_and_logits(nn::constant(zero)).features.value();
    double s0 = 0.0;
    for (int i = 0; i < cfg.feature_dim; ++i) s0 += feat0[i];
    s0 /= cfg.feature_dim;

    Tensor head({2, cfg.feature_dim});
    for (int i = 0; i < cfg.feature_dim; ++i) {
        head.at(0, i) = -10.0f / cfg.feature_dim;
        head.at(1, i) = 10.0f / cfg.feature_dim;
    }
    arch.put("clf.fc2.w", head);
    arch.put("clf.fc2.b", Tensor::from_values({2}, {static_cast<float>(10.0 * s0),
                                                    static_cast<float>(-10.0 * s0)}));
    model.store().load_from(arch);
    return model;
}

}  // namespace

TEST_CASE("evaluate: ground-truth-by-construction model scores 100") {
    ClassifierModel model = ground_truth_brightness_model();
    LabeledDataset ds = brightness_dataset(40, 5);
    CHECK(evaluate(model, ds, "bright") == 100.0);
}

TEST_CASE("evaluate: constant predictor on a balanced set scores exactly 50") {
    ClassifierConfig cfg = tiny_clf_config();
    ClassifierModel model(cfg);
    nn::ParamArchive arch;
    model.store().save_into(arch);
    arch.put("clf.fc2.w", Tensor::zeros({2, cfg.feature_dim}));
    arch.put("clf.fc2.b", Tensor::from_values({2}, {1.0f, 0.0f}));
    model.store().load_from(arch);
    LabeledDataset ds = brightness_dataset(40, 6);  // alternating labels, balanced
    CHECK(evaluate(model, ds, "bright") == 50.0);
}

TEST_CASE("evaluate: accuracy agrees with a confusion-matrix tally and is permutation invariant") {
    LabeledDataset ds = brightness_dataset(30, 7);
    TrainClassifierConfig tc;
    tc.epochs = 4;
    tc.lr = 2e-3;
    tc.seed = 1;
    tc.model = tiny_clf_config();
    ClassifierModel model = train_source_classifier(ds, "bright", tc);

    double acc = evaluate(model, ds, "bright");
    Tensor probs = predict_probs(model, ds.images);
    int tp = 0, tn = 0, fp = 0, fn = 0;
    for (int i = 0; i < ds.size(); ++i) {
        int pred = probs.at(i, 1) > probs.at(i, 0) ? 1 : 0;
        int truth = ds.labels[static_cast<size_t>(i)][0];
        if (pred == 1 && truth == 1) ++tp;
        if (pred == 0 && truth == 0) ++tn;
        if (pred == 1 && truth == 0) ++fp;
        if (pred == 0 && truth == 1) ++fn;
    }
    double error = 100.0 * (fp + fn) / ds.size();
    CHECK(acc == doctest::Approx(100.0 - error).epsilon(1e-12));
    CHECK(tp + tn + fp + fn == ds.size());

    LabeledDataset reversed = ds;
    std::reverse(reversed.images.begin(), reversed.images.end());
    std::reverse(reversed.labels.begin(), reversed.labels.end());
    CHECK(evaluate(model, reversed, "bright") == acc);

    LabeledDataset empty;
    empty.attribute_names = {"bright"};
    CHECK_THROWS(evaluate(model, empty, "bright"));
}

TEST_CASE("train_source_classifier: separable data reaches 100% within budget") {
    LabeledDataset ds = brightness_dataset(60, 8);
    TrainClassifierConfig tc;
    tc.epochs = 30;
    tc.lr = 2e-3;
    tc.seed = 2;
    tc.model = tiny_clf_config();
    double val_acc = 0.0;
    ClassifierModel model = train_source_classifier(ds, "bright", tc, &val_acc);
    CHECK(evaluate(model, ds, "bright") == 100.0);
    CHECK(val_acc >= 0.0);
}

TEST_CASE("train_source_classifier: zero epochs equals initialization, single-class aborts") {
    LabeledDataset ds = brightness_dataset(20, 9);
    TrainClassifierConfig tc;
    tc.epochs = 0;
    tc.seed = 3;
    tc.model = tiny_clf_config();
    ClassifierModel model = train_source_classifier(ds, "bright", tc);
    ClassifierConfig ref_cfg = tc.model;
    ref_cfg.init_seed = tc.seed;
    ClassifierModel reference(ref_cfg);
    auto a = model.params();
    auto b = reference.params();
    for (size_t i = 0; i < a.size(); ++i) CHECK(tensors_equal(a[i].value(), b[i].value()));

    LabeledDataset single = ds;
    for (auto& row : single.labels) row[0] = 1;
    CHECK_THROWS(train_source_classifier(single, "bright", tc));
}

TEST_CASE("extract_features: shape, duplicates, batching consistency") {
    LabeledDataset ds = brightness_dataset(9, 10);
    ds.images.push_back(ds.images[0]);  // duplicate
    ClassifierModel model(tiny_clf_config());
    Tensor f = extract_features(model, ds.images, 4);
    REQUIRE(f.dim(0) == 10);
    REQUIRE(f.dim(1) == model.config().feature_dim);
    for (int d = 0; d < f.dim(1); ++d) CHECK(f.at(0, d) == f.at(9, d));

    Tensor f1 = extract_features(model, ds.images, 1);
    for (int64_t i = 0; i < f.size(); ++i) CHECK(f[i] == f1[i]);
}

TEST_CASE("knn_cosine_graph matches a brute-force all-pairs scan") {
    Rng rng(11);
    int n = 40, d = 8;
    Tensor f = nn::randn_tensor({n, d}, rng);
    auto graph = knn_cosine_graph(f, 5);
    REQUIRE(static_cast<int>(graph.size()) == n);

    for (int i = 0; i < n; ++i) {
        // Plain-double cosine distances, full scan.
        std::vector<std::pair<double, int>> dist;
        double ni = 0.0;
        for (int k = 0; k < d; ++k) ni += static_cast<double>(f.at(i, k)) * f.at(i, k);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dot = 0.0, nj = 0.0;
            for (int k = 0; k < d; ++k) {
                dot += static_cast<double>(f.at(i, k)) * f.at(j, k);
                nj += static_cast<double>(f.at(j, k)) * f.at(j, k);
            }
            double cos = dot / std::sqrt(ni * nj);
            dist.push_back({1.0 - cos, j});
        }
        std::sort(dist.begin(), dist.end());
        // The top-1 neighbor must agree exactly; the full set can differ only
        // under float ties, which the random data avoids.
        CHECK(graph[static_cast<size_t>(i)][0] == dist[0].second);
        std::vector<int> expected;
        for (int k = 0; k < 5; ++k) expected.push_back(dist[static_cast<size_t>(k)].second);
        std::sort(expected.begin(), expected.end());
        std::vector<int> got = graph[static_cast<size_t>(i)];
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
    }
}

TEST_CASE("nrc_adapt: identical images give zero consistency with whole-batch epochs") {
    ClassifierModel model(tiny_clf_config());
    std::vector<Tensor> images(12, Tensor::full({3, 16, 16}, 0.3f));
    AdaptConfig cfg;
    cfg.k = 3;
    cfg.epochs = 3;
    cfg.batch_size = 64;  // single batch per epoch
    cfg.lr = 1e-3;
    std::vector<double> consistency;
    nrc_adapt(model, images, cfg, &consistency);
    REQUIRE(consistency.size() == 3);
    for (double v : consistency) CHECK(std::fabs(v) < 1e-4);
}

TEST_CASE("nrc_adapt: zero epochs and zero lr leave the model unchanged") {
    LabeledDataset ds = brightness_dataset(12, 12);
    ClassifierModel model(tiny_clf_config());

    AdaptConfig cfg;
    cfg.k = 3;
    cfg.epochs = 0;
    ClassifierModel out = nrc_adapt(model, ds.images, cfg);
    auto a = model.params();
    auto b = out.params();
    for (size_t i = 0; i < a.size(); ++i) CHECK(tensors_equal(a[i].value(), b[i].value()));

    cfg.epochs = 2;
    cfg.lr = 0.0;
    ClassifierModel frozen = nrc_adapt(model, ds.images, cfg);
    auto c = frozen.params();
    for (size_t i = 0; i < a.size(); ++i) CHECK(tensors_equal(a[i].value(), c[i].value()));

    CHECK_THROWS(nrc_adapt(model, {ds.images[0], ds.images[1]}, cfg));  // fewer than k+1
}

TEST_CASE("nrc_adapt: confident well-separated clusters keep their predictions") {
    LabeledDataset ds = brightness_dataset(24, 13);
    TrainClassifierConfig tc;
    tc.epochs = 30;
    tc.lr = 2e-3;
    tc.seed = 4;
    tc.model = tiny_clf_config();
    ClassifierModel model = train_source_classifier(ds, "bright", tc);
    REQUIRE(evaluate(model, ds, "bright") == 100.0);

    Tensor before = predict_probs(model, ds.images);
    AdaptConfig cfg;
    cfg.k = 3;
    cfg.k_expanded = 3;
    cfg.epochs = 3;
    cfg.batch_size = 64;
    ClassifierModel adapted = nrc_adapt(model, ds.images, cfg);
    Tensor after = predict_probs(adapted, ds.images);
    for (int i = 0; i < ds.size(); ++i) {
        int pb = before.at(i, 1) > before.at(i, 0) ? 1 : 0;
        int pa = after.at(i, 1) > after.at(i, 0) ? 1 : 0;
        CHECK(pa == pb);
    }
}

TEST_CASE("memo_adapt: identity pool with a saturated prediction is a no-op") {
    ClassifierModel model = ground_truth_brightness_model();
    // Scale the head to saturate the softmax exactly.
    nn::ParamArchive arch;
    model.store().save_into(arch);
    Tensor head = arch.get("clf.fc2.w");
    Tensor bias = arch.get("clf.fc2.b");
    for (int64_t i = 0; i < head.size(); ++i) head[i] *= 200.0f;
    for (int64_t i = 0; i < bias.size(); ++i) bias[i] *= 200.0f;
    arch.put("clf.fc2.w", head);
    arch.put("clf.fc2.b", bias);
    model.store().load_from(arch);

    Tensor image = Tensor::full({3, 16, 16}, 0.6f);
    Tensor plain = predict_probs(model, {image});
    REQUIRE(plain.at(0, 1) == 1.0f);  // exactly one-hot in float

    MemoConfig cfg;
    cfg.pool = AugPool::kIdentity;
    cfg.n_aug = 8;
    cfg.steps = 1;
    MemoResult r = memo_adapt(model, image, cfg);
    CHECK(r.predicted == 1);
    CHECK(r.probabilities[1] == 1.0);
    CHECK(r.entropy_before == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(r.entropy_after <= r.entropy_before + 1e-12);
}

TEST_CASE("memo_adapt: zero steps equals the plain prediction and stays episodic") {
    LabeledDataset ds = brightness_dataset(6, 14);
    TrainClassifierConfig tc;
    tc.epochs = 6;
    tc.lr = 2e-3;
    tc.seed = 5;
    tc.model = tiny_clf_config();
    ClassifierModel model = train_source_classifier(ds, "bright", tc);
    std::vector<Tensor> snapshot;
    for (const auto& p : model.params()) snapshot.push_back(p.value());

    Tensor image = ds.images[0];
    Tensor plain = predict_probs(model, {image});
    MemoConfig cfg;
    cfg.pool = AugPool::kMixlike;
    cfg.steps = 0;
    cfg.n_aug = 4;
    cfg.rng_seed = 1;
    MemoResult r = memo_adapt(model, image, cfg);
    CHECK(r.probabilities[0] == doctest::Approx(plain.at(0, 0)).epsilon(1e-7));
    CHECK(r.probabilities[1] == doctest::Approx(plain.at(0, 1)).epsilon(1e-7));

    // Episodic: the shared model is untouched and order cannot matter.
    auto params = model.params();
    for (size_t i = 0; i < params.size(); ++i) CHECK(tensors_equal(params[i].value(), snapshot[i]));

    cfg.steps = 1;
    MemoResult first = memo_adapt(model, ds.images[1], cfg);
    memo_adapt(model, ds.images[2], cfg);
    MemoResult again = memo_adapt(model, ds.images[1], cfg);
    CHECK(first.predicted == again.predicted);
    CHECK(first.probabilities == again.probabilities);
}

TEST_CASE("memo_adapt: marginal entropy descends on shifted inputs") {
    LabeledDataset ds = brightness_dataset(20, 15);
    TrainClassifierConfig tc;
    tc.epochs = 10;
    tc.lr = 2e-3;
    tc.seed = 6;
    tc.model = tiny_clf_config();
    ClassifierModel model = train_source_classifier(ds, "bright", tc);

    Rng rng(77);
    int non_increasing = 0, total = 20;
    for (int i = 0; i < total; ++i) {
        Tensor img = nn::randn_tensor({3, 16, 16}, rng, 0.5f);
        for (int64_t j = 0; j < img.size(); ++j) img[j] = std::clamp(img[j], -1.0f, 1.0f);
        MemoConfig cfg;
        cfg.pool = AugPool::kMixlike;
        cfg.n_aug = 8;
        cfg.steps = 1;
        cfg.lr = 1e-3;
        cfg.rng_seed = static_cast<uint64_t>(i);
        MemoResult r = memo_adapt(model, img, cfg);
        if (r.entropy_after <= r.entropy_before + 1e-9) ++non_increasing;
    }
    CHECK(non_increasing >= 19);
}

TEST_CASE("augment_image: deterministic per (seed, index) and in range") {
    LabeledDataset ds = brightness_dataset(2, 16);
    for (AugPool pool : {AugPool::kMixlike, AugPool::kRandConv}) {
        Tensor a = augment_image(ds.images[0], pool, 42, 3);
        Tensor b = augment_image(ds.images[0], pool, 42, 3);
        CHECK(tensors_equal(a, b));
        CHECK(a.min_value() >= -1.0f);
        CHECK(a.max_value() <= 1.0f);
        Tensor c = augment_image(ds.images[0], pool, 42, 4);
        CHECK(a.same_shape(c));
    }
}

TEST_CASE("classifier checkpoint roundtrip") {
    ClassifierModel model(tiny_clf_config());
    std::string dir = "test_clf_ckpt";
    save_classifier(model, dir, {{"attribute", "bright"}});
    nn::Manifest m;
    ClassifierModel loaded = load_classifier(dir, &m);
    CHECK(m.at("attribute") == "bright");
    auto a = model.params();
    auto b = loaded.params();
    for (size_t i = 0; i < a.size(); ++i) CHECK(tensors_equal(a[i].value(), b[i].value()));
    std::filesystem::remove_all(dir);
}
