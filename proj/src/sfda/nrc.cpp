#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/sfda/sfda.hpp"

namespace genaug::sfda {

using namespace genaug::nn;

std::vector<std::vector<int>> knn_cosine_graph(const Tensor& features, int k) {
    int n = features.dim(0), d = features.dim(1);
    Eigen::MatrixXf f(n, d);
    for (int i = 0; i < n; ++i) {
        double norm = 0.0;
        for (int j = 0; j < d; ++j) norm += static_cast<double>(features.at(i, j)) * features.at(i, j);
        float inv = norm > 0.0 ? static_cast<float>(1.0 / std::sqrt(norm)) : 0.0f;
        for (int j = 0; j < d; ++j) f(i, j) = features.at(i, j) * inv;
    }
    Eigen::MatrixXf sim = f * f.transpose();
    std::vector<std::vector<int>> nn(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        idx.erase(idx.begin() + i);  // exclude self
        int kk = std::min(k, n - 1);
        std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), [&](int a, int b) {
            if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
            return a < b;  // deterministic tie break
        });
        nn[static_cast<size_t>(i)].assign(idx.begin(), idx.begin() + kk);
    }
    return nn;
}

ClassifierModel nrc_adapt(const ClassifierModel& model, const std::vector<Tensor>& images,
                          const AdaptConfig& cfg, std::vector<double>* consistency_log) {
    int n = static_cast<int>(images.size());
    if (n < cfg.k + 1)
        throw std::invalid_argument("nrc_adapt: need at least k+1 samples, got " +
                                    std::to_string(n));
    ClassifierModel adapted = model.clone();
    int classes = adapted.config().classes;

    SgdMomentum opt(adapted.params(), cfg.lr, cfg.momentum);
    Rng rng(Rng::derive(cfg.rng_seed, 0x6e7263));

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Epoch snapshot: features for the neighbor graph, predictions for
        // the consistency targets.
        Tensor feats = extract_features(adapted, images, cfg.batch_size);
        Tensor probs = predict_probs(adapted, images, cfg.batch_size);
        std::vector<std::vector<int>> nn_k = knn_cosine_graph(feats, cfg.k);
        std::vector<std::vector<int>> nn_e =
            cfg.k_expanded == cfg.k ? nn_k : knn_cosine_graph(feats, cfg.k_expanded);

        // Reciprocity: affinity 1 when i is also among j's neighbors.
        std::vector<std::vector<bool>> is_nn(static_cast<size_t>(n),
                                             std::vector<bool>(static_cast<size_t>(n), false));
        for (int i = 0; i < n; ++i)
            for (int j : nn_k[static_cast<size_t>(i)]) is_nn[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;

        Tensor targets({n, classes});
        for (int i = 0; i < n; ++i) {
            std::vector<double> acc(static_cast<size_t>(classes), 0.0);
            double wsum = 0.0;
            for (int j : nn_k[static_cast<size_t>(i)]) {
                double a = is_nn[static_cast<size_t>(j)][static_cast<size_t>(i)] ? 1.0 : 0.1;
                for (int c = 0; c < classes; ++c) acc[static_cast<size_t>(c)] += a * probs.at(j, c);
                wsum += a;
                for (int m : nn_e[static_cast<size_t>(j)]) {
                    for (int c = 0; c < classes; ++c)
                        acc[static_cast<size_t>(c)] += 0.1 * probs.at(m, c);
                    wsum += 0.1;
                }
            }
            for (int c = 0; c < classes; ++c)
                targets.at(i, c) = static_cast<float>(acc[static_cast<size_t>(c)] / wsum);
        }

        for (int i = n - 1; i > 0; --i) {
            int j = rng.uniform_int(0, i);
            std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
        }
        for (int start = 0; start < n; start += cfg.batch_size) {
            int b = std::min(cfg.batch_size, n - start);
            std::vector<Tensor> batch_imgs;
            Tensor batch_targets({b, classes});
            batch_imgs.reserve(static_cast<size_t>(b));
            for (int i = 0; i < b; ++i) {
                int idx = order[static_cast<size_t>(start + i)];
                batch_imgs.push_back(images[static_cast<size_t>(idx)]);
                for (int c = 0; c < classes; ++c) batch_targets.at(i, c) = targets.at(idx, c);
            }
            Var logits = adapted.logits(constant(stack_images(batch_imgs, 0, b)));
            // KL(target || pred) = CE(target, pred) - H(target); the entropy
            // offset is constant w.r.t. the model, so gradients match CE.
            double target_entropy = 0.0;
            for (int i = 0; i < b; ++i)
                for (int c = 0; c < classes; ++c) {
                    double t = batch_targets.at(i, c);
                    if (t > 0.0) target_entropy -= t * std::log(t);
                }
            target_entropy /= b;
            Var loss = add_scalar(cross_entropy_soft(logits, batch_targets),
                                  static_cast<float>(-target_entropy));
            if (consistency_log) consistency_log->push_back(loss.scalar());
            // Diversity regularizer: negative entropy of the batch-mean
            // prediction, pushed down to keep predictions spread out.
            Var pbar = mean_rows(softmax_rows(logits));
            Var neg_entropy = reduce_sum(mul(pbar, log_eps(pbar)));
            loss = add(loss, scale(neg_entropy, static_cast<float>(cfg.diversity_weight)));
            if (!std::isfinite(loss.scalar()))
                throw std::runtime_error("nrc_adapt: non-finite loss at epoch " +
                                         std::to_string(epoch));
            opt.zero_grad();
            backward(loss);
            opt.step();
        }
    }
    return adapted;
}

}  // namespace genaug::sfda
