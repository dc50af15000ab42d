#include "genaug/stylegen/generator.hpp"

#include <cmath>
#include <stdexcept>

namespace genaug::stylegen {

using namespace genaug::nn;

namespace {

// Distribute L layers over the 4 -> S resolution ladder, coarse levels first.
void layer_schedule(const GeneratorConfig& cfg, std::vector<int>& channels,
                    std::vector<bool>& upsample) {
    int n_res = 1;
    for (int s = 4; s < cfg.image_size; s *= 2) ++n_res;
    if (4 << (n_res - 1) != cfg.image_size)
        throw std::invalid_argument("generator: image_size must be 4 * 2^k");
    if (cfg.layers < n_res)
        throw std::invalid_argument("generator: need at least one layer per resolution");
    int per = cfg.layers / n_res, extra = cfg.layers % n_res;
    channels.clear();
    upsample.clear();
    for (int r = 0; r < n_res; ++r) {
        int count = per + (r < extra ? 1 : 0);
        int ch = r < 2 ? cfg.base_channels : std::max(16, cfg.base_channels >> (r - 1));
        for (int i = 0; i < count; ++i) {
            channels.push_back(ch);
            upsample.push_back(r > 0 && i == 0);
        }
    }
}

Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng, float gain = 1.0f) {
    return randn_tensor(std::move(shape), rng, gain * std::sqrt(2.0f / static_cast<float>(fan_in)));
}

}  // namespace

bool same_architecture(const GeneratorConfig& a, const GeneratorConfig& b) {
    return a.latent_dim == b.latent_dim && a.style_dim == b.style_dim && a.layers == b.layers &&
           a.image_size == b.image_size && a.base_channels == b.base_channels &&
           a.mapping_layers == b.mapping_layers;
}

GeneratorModel::GeneratorModel(const GeneratorConfig& cfg) : cfg_(cfg) {
    layer_schedule(cfg_, channels_, upsample_);
    Rng rng(cfg_.init_seed);

    for (int i = 0; i < cfg_.mapping_layers; ++i) {
        int in = i == 0 ? cfg_.latent_dim : cfg_.style_dim;
        MapLayer ml;
        ml.w = mapping_.add("map.fc" + std::to_string(i) + ".w",
                            he_normal({cfg_.style_dim, in}, in, rng));
        ml.b = mapping_.add("map.fc" + std::to_string(i) + ".b", Tensor::zeros({cfg_.style_dim}));
        map_vars_.push_back(ml);
    }

    const_input_ = synthesis_.add("syn.const", randn_tensor({1, channels_[0], 4, 4}, rng));
    int prev_ch = channels_[0];
    for (int l = 0; l < cfg_.layers; ++l) {
        int ch = channels_[static_cast<size_t>(l)];
        std::string p = "syn.l" + std::to_string(l) + ".";
        LayerVars lv;
        lv.conv_w = synthesis_.add(p + "conv.w", he_normal({ch, prev_ch, 3, 3}, prev_ch * 9, rng));
        lv.conv_b = synthesis_.add(p + "conv.b", Tensor::zeros({ch}));
        // Small style affines: initial per-channel scale ~1, shift ~0.
        lv.style_scale_w = synthesis_.add(p + "style_s.w",
                                          he_normal({ch, cfg_.style_dim}, cfg_.style_dim, rng, 0.25f));
        lv.style_scale_b = synthesis_.add(p + "style_s.b", Tensor::zeros({ch}));
        lv.style_shift_w = synthesis_.add(p + "style_b.w",
                                          he_normal({ch, cfg_.style_dim}, cfg_.style_dim, rng, 0.25f));
        lv.style_shift_b = synthesis_.add(p + "style_b.b", Tensor::zeros({ch}));
        layer_vars_.push_back(lv);
        prev_ch = ch;
    }
    out_w_ = synthesis_.add("syn.out.w", he_normal({3, prev_ch, 1, 1}, prev_ch, rng, 0.5f));
    out_b_ = synthesis_.add("syn.out.b", Tensor::zeros({3}));
}

Var GeneratorModel::map_latent(const Var& z) const {
    if (z.value().rank() != 2 || z.value().dim(1) != cfg_.latent_dim)
        throw std::invalid_argument("map_latent: expects [n, latent_dim]");
    Var x = row_normalize(z);
    for (size_t i = 0; i < map_vars_.size(); ++i) {
        x = linear(x, map_vars_[i].w, map_vars_[i].b);
        x = leaky_relu(x, 0.2f);
    }
    return x;
}

GeneratorModel::Forward GeneratorModel::forward(const std::vector<Var>& styles,
                                                const InterceptPlan* intercepts) const {
    if (static_cast<int>(styles.size()) != cfg_.layers)
        throw std::invalid_argument("forward: need one style row per layer");
    int n = styles[0].value().dim(0);
    if (intercepts && !intercepts->empty()) {
        if (n != 1) throw std::invalid_argument("forward: intercepts require batch size 1");
        for (const auto& [layer, fn] : *intercepts)
            if (layer < 1 || layer > cfg_.layers)
                throw std::invalid_argument("forward: intercept layer index out of range");
    }

    Forward out;
    Var x = repeat_batch(const_input_, n);
    for (int l = 0; l < cfg_.layers; ++l) {
        const LayerVars& lv = layer_vars_[static_cast<size_t>(l)];
        if (upsample_[static_cast<size_t>(l)]) x = upsample2x(x);
        x = conv2d(x, lv.conv_w, lv.conv_b, 1);
        int h = x.value().dim(2), w = x.value().dim(3);
        // Per-channel normalization, then style-driven affine.
        Var mu = spatial_mean(x);
        Var xc = sub(x, broadcast_spatial(mu, h, w));
        Var var = spatial_mean(mul(xc, xc));
        Var xn = channel_scale(xc, rsqrt_eps(var, 1e-6f));
        const Var& style = styles[static_cast<size_t>(l)];
        Var s = add_scalar(linear(style, lv.style_scale_w, lv.style_scale_b), 1.0f);
        Var t = linear(style, lv.style_shift_w, lv.style_shift_b);
        x = channel_shift(channel_scale(xn, s), t);
        x = leaky_relu(x, 0.2f);

        if (intercepts) {
            auto it = intercepts->find(l + 1);
            if (it != intercepts->end()) {
                int c = x.value().dim(1);
                ActivationTensor act{x.value().reshaped({c, h, w}), l + 1};
                ActivationTensor edited = it->second(act);
                if (!edited.values.same_shape(act.values))
                    throw std::runtime_error("intercept changed activation shape at layer " +
                                             std::to_string(l + 1));
                x = constant(edited.values.reshaped({1, c, h, w}));
            }
        }
        out.activations.push_back(x);
    }
    out.image = tanh_val(conv2d(x, out_w_, out_b_, 0));
    return out;
}

std::vector<Var> GeneratorModel::all_params() const {
    std::vector<Var> v = mapping_.vars();
    for (const Var& p : synthesis_.vars()) v.push_back(p);
    return v;
}

GeneratorModel GeneratorModel::clone() const {
    GeneratorModel g(cfg_);
    g.mapping_.copy_values_from(mapping_);
    g.synthesis_.copy_values_from(synthesis_);
    return g;
}

StyleCode sample_wplus(const GeneratorModel& gen, uint64_t rng_seed) {
    Rng rng(rng_seed);
    Tensor z = randn_tensor({1, gen.config().latent_dim}, rng);
    Var w = gen.map_latent(constant(z));
    int L = gen.layers(), D = gen.style_dim();
    StyleCode code;
    code.rows = Tensor({L, D});
    for (int l = 0; l < L; ++l)
        for (int d = 0; d < D; ++d) code.rows.at(l, d) = w.value().at(0, d);
    return code;
}

SynthesisOutput synthesize(const GeneratorModel& gen, const StyleCode& code,
                           const InterceptPlan* intercepts) {
    if (code.layers() != gen.layers() || code.dim() != gen.style_dim())
        throw std::invalid_argument("synthesize: style code shape does not match generator");
    std::vector<Var> styles;
    styles.reserve(static_cast<size_t>(gen.layers()));
    for (int l = 0; l < gen.layers(); ++l) {
        Tensor row({1, gen.style_dim()});
        for (int d = 0; d < gen.style_dim(); ++d) row.at(0, d) = code.rows.at(l, d);
        styles.push_back(constant(std::move(row)));
    }
    GeneratorModel::Forward f = gen.forward(styles, intercepts);

    SynthesisOutput out;
    int s = gen.image_size();
    out.image = f.image.value().reshaped({3, s, s});
    for (int l = 0; l < gen.layers(); ++l) {
        const Tensor& v = f.activations[static_cast<size_t>(l)].value();
        out.activations.push_back(
            ActivationTensor{v.reshaped({v.dim(1), v.dim(2), v.dim(3)}), l + 1});
    }
    return out;
}

Tensor mean_style(const GeneratorModel& gen, int n_draws, uint64_t seed) {
    Rng rng(seed);
    Tensor z = randn_tensor({n_draws, gen.config().latent_dim}, rng);
    Var w = gen.map_latent(constant(z));
    int D = gen.style_dim();
    Tensor mean({D});
    for (int d = 0; d < D; ++d) {
        double s = 0.0;
        for (int n = 0; n < n_draws; ++n) s += w.value().at(n, d);
        mean[d] = static_cast<float>(s / n_draws);
    }
    return mean;
}

}  // namespace genaug::stylegen
