#include "genaug/stylegen/discriminator.hpp"

#include <cmath>
#include <stdexcept>

#include "genaug/nn/rng.hpp"

namespace genaug::stylegen {

using namespace genaug::nn;

DiscriminatorModel::DiscriminatorModel(const DiscriminatorConfig& cfg) : cfg_(cfg) {
    if (cfg_.image_size < 8 || (cfg_.image_size & (cfg_.image_size - 1)) != 0)
        throw std::invalid_argument("discriminator: image_size must be a power of two >= 8");
    Rng rng(cfg_.init_seed);
    int res = cfg_.image_size;
    int in_ch = 3;
    int ch = cfg_.base_channels;
    int idx = 0;
    while (res > 4) {
        Conv c;
        std::string p = "disc.c" + std::to_string(idx) + ".";
        c.w = params_.add(p + "w", randn_tensor({ch, in_ch, 3, 3}, rng,
                                                std::sqrt(2.0f / static_cast<float>(in_ch * 9))));
        c.b = params_.add(p + "b", Tensor::zeros({ch}));
        convs_.push_back(c);
        in_ch = ch;
        ch = std::min(2 * ch, 64);
        res /= 2;
        ++idx;
    }
    int flat = in_ch * 4 * 4;
    fc_w_ = params_.add("disc.fc.w",
                        randn_tensor({1, flat}, rng, std::sqrt(1.0f / static_cast<float>(flat))));
    fc_b_ = params_.add("disc.fc.b", Tensor::zeros({1}));
}

std::vector<Var> DiscriminatorModel::trunk(const Var& images) const {
    const Tensor& v = images.value();
    if (v.rank() != 4 || v.dim(1) != 3 || v.dim(2) != cfg_.image_size || v.dim(3) != cfg_.image_size)
        throw std::invalid_argument("discriminator: expects [n,3," + std::to_string(cfg_.image_size) +
                                    "," + std::to_string(cfg_.image_size) + "], got " + v.shape_str());
    std::vector<Var> feats;
    Var x = images;
    for (const Conv& c : convs_) {
        x = leaky_relu(conv2d(x, c.w, c.b, 1), 0.2f);
        feats.push_back(x);
        x = avgpool2(x);
    }
    feats.push_back(x);  // pooled trunk output, consumed by logits only
    return feats;
}

Var DiscriminatorModel::logits(const Var& images) const {
    std::vector<Var> feats = trunk(images);
    Var x = feats.back();
    const Tensor& v = x.value();
    Var flat = reshape(x, {v.dim(0), v.dim(1) * v.dim(2) * v.dim(3)});
    return linear(flat, fc_w_, fc_b_);
}

std::vector<Var> DiscriminatorModel::features(const Var& images) const {
    std::vector<Var> feats = trunk(images);
    feats.pop_back();
    return feats;
}

DiscriminatorModel DiscriminatorModel::clone() const {
    DiscriminatorModel d(cfg_);
    d.params_.copy_values_from(params_);
    return d;
}

std::vector<Tensor> disc_features(const DiscriminatorModel& disc, const Tensor& image) {
    if (image.rank() != 3 || image.dim(0) != 3)
        throw std::invalid_argument("disc_features: expects [3,S,S], got " + image.shape_str());
    Var batch = constant(image.reshaped({1, 3, image.dim(1), image.dim(2)}));
    std::vector<Var> feats = disc.features(batch);
    std::vector<Tensor> out;
    out.reserve(feats.size());
    for (const Var& f : feats) {
        const Tensor& v = f.value();
        out.push_back(v.reshaped({v.dim(1), v.dim(2), v.dim(3)}));
    }
    return out;
}

}  // namespace genaug::stylegen
