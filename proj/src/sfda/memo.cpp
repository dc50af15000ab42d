#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/sfda/sfda.hpp"

namespace genaug::sfda {

using namespace genaug::nn;

std::string to_string(AugPool p) {
    switch (p) {
        case AugPool::kMixlike: return "mixlike";
        case AugPool::kRandConv: return "randconv";
        case AugPool::kIdentity: return "identity";
    }
    return "mixlike";
}

AugPool aug_pool_from_string(const std::string& s) {
    if (s == "mixlike") return AugPool::kMixlike;
    if (s == "randconv") return AugPool::kRandConv;
    if (s == "identity") return AugPool::kIdentity;
    throw std::invalid_argument("unknown augmentation pool: " + s);
}

namespace {

// All pixel helpers work on [3,H,W] tensors in [-1,1].

float sample_clamped(const Tensor& img, int c, int y, int x) {
    int h = img.dim(1), w = img.dim(2);
    y = std::clamp(y, 0, h - 1);
    x = std::clamp(x, 0, w - 1);
    return img[(static_cast<int64_t>(c) * h + y) * w + x];
}

float sample_bilinear(const Tensor& img, int c, double y, double x) {
    int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
    double fy = y - y0, fx = x - x0;
    float v00 = sample_clamped(img, c, y0, x0);
    float v01 = sample_clamped(img, c, y0, x0 + 1);
    float v10 = sample_clamped(img, c, y0 + 1, x0);
    float v11 = sample_clamped(img, c, y0 + 1, x0 + 1);
    return static_cast<float>((1 - fy) * ((1 - fx) * v00 + fx * v01) +
                              fy * ((1 - fx) * v10 + fx * v11));
}

Tensor hflip(const Tensor& img) {
    int h = img.dim(1), w = img.dim(2);
    Tensor out({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<int64_t>(c) * h + y) * w + x] =
                    img[(static_cast<int64_t>(c) * h + y) * w + (w - 1 - x)];
    return out;
}

Tensor rotate(const Tensor& img, double degrees) {
    int h = img.dim(1), w = img.dim(2);
    double rad = degrees * 3.14159265358979323846 / 180.0;
    double cs = std::cos(rad), sn = std::sin(rad);
    double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
    Tensor out({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double dy = y - cy, dx = x - cx;
                double sy = cy + cs * dy - sn * dx;
                double sx = cx + sn * dy + cs * dx;
                out[(static_cast<int64_t>(c) * h + y) * w + x] = sample_bilinear(img, c, sy, sx);
            }
    return out;
}

Tensor crop_resize(const Tensor& img, double fraction, double off_y, double off_x) {
    int h = img.dim(1), w = img.dim(2);
    double ch = fraction * h, cw = fraction * w;
    double y0 = off_y * (h - ch), x0 = off_x * (w - cw);
    Tensor out({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double sy = y0 + (y + 0.5) * ch / h - 0.5;
                double sx = x0 + (x + 0.5) * cw / w - 0.5;
                out[(static_cast<int64_t>(c) * h + y) * w + x] = sample_bilinear(img, c, sy, sx);
            }
    return out;
}

Tensor brightness(const Tensor& img, double delta01) {
    Tensor out = img;
    float d = static_cast<float>(2.0 * delta01);  // [0,1] shift expressed in [-1,1] units
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i] + d, -1.0f, 1.0f);
    return out;
}

Tensor contrast(const Tensor& img, double factor) {
    Tensor out = img;
    for (int64_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(static_cast<float>(factor) * out[i], -1.0f, 1.0f);
    return out;
}

Tensor mixlike_one(const Tensor& img, Rng& rng, bool allow_compose) {
    int op = rng.uniform_int(0, allow_compose ? 6 : 5);
    switch (op) {
        case 0: return img;
        case 1: return hflip(img);
        case 2: return rotate(img, rng.uniform(-15.0, 15.0));
        case 3: return crop_resize(img, 0.8, rng.uniform(), rng.uniform());
        case 4: return brightness(img, rng.uniform(-0.2, 0.2));
        case 5: return contrast(img, rng.uniform(0.8, 1.2));
        default: {
            Tensor once = mixlike_one(img, rng, false);
            return mixlike_one(once, rng, false);
        }
    }
}

Tensor randconv_one(const Tensor& img, Rng& rng) {
    // Fresh random 3x3 RGB-mixing kernel, blended with the input.
    Tensor kernel = randn_tensor({3, 3, 3, 3}, rng, std::sqrt(1.0f / 27.0f));
    double blend = rng.uniform();
    int h = img.dim(1), w = img.dim(2);
    Tensor out({3, h, w});
    for (int k = 0; k < 3; ++k)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int c = 0; c < 3; ++c)
                    for (int i = -1; i <= 1; ++i)
                        for (int j = -1; j <= 1; ++j)
                            acc += static_cast<double>(kernel.at(k, c, i + 1, j + 1)) *
                                   sample_clamped(img, c, y + i, x + j);
                double v = blend * acc +
                           (1.0 - blend) * img[(static_cast<int64_t>(k) * h + y) * w + x];
                out[(static_cast<int64_t>(k) * h + y) * w + x] =
                    static_cast<float>(std::clamp(v, -1.0, 1.0));
            }
    return out;
}

double marginal_entropy(const ClassifierModel& model, const Tensor& batch) {
    Var probs = softmax_rows(model.logits(constant(batch)));
    int n = probs.value().dim(0), k = probs.value().dim(1);
    double h = 0.0;
    for (int c = 0; c < k; ++c) {
        double m = 0.0;
        for (int r = 0; r < n; ++r) m += probs.value().at(r, c);
        m /= n;
        if (m > 0.0) h -= m * std::log(m);
    }
    return h;
}

}  // namespace

Tensor augment_image(const Tensor& image, AugPool pool, uint64_t seed, int copy_index) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(copy_index)));
    switch (pool) {
        case AugPool::kMixlike: return mixlike_one(image, rng, true);
        case AugPool::kRandConv: return randconv_one(image, rng);
        case AugPool::kIdentity: return image;
    }
    return image;
}

MemoResult memo_adapt(const ClassifierModel& model, const Tensor& image, const MemoConfig& cfg) {
    if (cfg.n_aug < 1) throw std::invalid_argument("memo_adapt: need at least one augmented copy");
    ClassifierModel episodic = model.clone();

    std::vector<Tensor> copies;
    copies.reserve(static_cast<size_t>(cfg.n_aug));
    for (int i = 0; i < cfg.n_aug; ++i)
        copies.push_back(augment_image(image, cfg.pool, cfg.rng_seed, i));
    Tensor batch = stack_images(copies, 0, cfg.n_aug);

    MemoResult result;
    result.entropy_before = marginal_entropy(episodic, batch);

    SgdMomentum opt(cfg.adapt_all ? episodic.params() : episodic.head_params(), cfg.lr, 0.0);
    for (int step = 0; step < cfg.steps; ++step) {
        Var probs = softmax_rows(episodic.logits(constant(batch)));
        Var pm = mean_rows(probs);
        Var entropy = neg(reduce_sum(mul(pm, log_eps(pm))));
        if (!std::isfinite(entropy.scalar()))
            throw std::runtime_error("memo_adapt: non-finite marginal entropy");
        opt.zero_grad();
        backward(entropy);
        opt.step();
    }
    result.entropy_after = marginal_entropy(episodic, batch);

    Tensor probs = predict_probs(episodic, {image});
    int classes = episodic.config().classes;
    result.probabilities.resize(static_cast<size_t>(classes));
    result.predicted = 0;
    for (int c = 0; c < classes; ++c) {
        result.probabilities[static_cast<size_t>(c)] = probs.at(0, c);
        if (probs.at(0, c) > probs.at(0, result.predicted)) result.predicted = c;
    }
    return result;
}

}  // namespace genaug::sfda
