#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "genaug/nn/ops.hpp"
#include "genaug/nn/params.hpp"
#include "genaug/nn/rng.hpp"

namespace genaug::stylegen {

using nn::Tensor;
using nn::Var;

// Per-layer latent matrix driving the synthesis network, one row per layer.
struct StyleCode {
    Tensor rows;  // [L, D]

    int layers() const { return rows.dim(0); }
    int dim() const { return rows.dim(1); }
};

// One synthesis layer's output for a single sample, channels-first.
// layer_index is 1-based, matching the public layer-range conventions.
struct ActivationTensor {
    Tensor values;  // [K, H, W]
    int layer_index = 0;

    int channels() const { return values.dim(0); }
    int height() const { return values.dim(1); }
    int width() const { return values.dim(2); }
};

// Mid-forward activation edit: layer (1-based) -> replacement function. The
// edited tensor feeds the next layer; gradients do not flow through an edit.
using InterceptFn = std::function<ActivationTensor(const ActivationTensor&)>;
using InterceptPlan = std::map<int, InterceptFn>;

struct GeneratorConfig {
    int latent_dim = 64;    // D_z
    int style_dim = 64;     // D
    int layers = 8;         // L
    int image_size = 32;    // S
    int base_channels = 64;
    int mapping_layers = 3;
    uint64_t init_seed = 1;

    bool operator==(const GeneratorConfig&) const = default;
};

// Same network shape; initialization seeds are free to differ.
bool same_architecture(const GeneratorConfig& a, const GeneratorConfig& b);

// Style-based generator: mapping MLP plus a synthesis stack that starts from
// a learned 4x4 constant and doubles resolution up to image_size. Each layer
// is conv -> per-channel normalization -> style-driven affine -> leaky relu,
// and its post-activation output can be intercepted and replaced.
class GeneratorModel {
public:
    explicit GeneratorModel(const GeneratorConfig& cfg);

    const GeneratorConfig& config() const { return cfg_; }
    int layers() const { return cfg_.layers; }
    int style_dim() const { return cfg_.style_dim; }
    int image_size() const { return cfg_.image_size; }
    int layer_channels(int layer_1based) const { return channels_[layer_1based - 1]; }

    // z [n, D_z] -> w [n, D]
    Var map_latent(const Var& z) const;

    struct Forward {
        Var image;                   // [n, 3, S, S]
        std::vector<Var> activations;  // L entries, post-intercept
    };
    // styles: L Vars of shape [n, D] (may alias the same node). Intercepts,
    // if given, require n == 1.
    Forward forward(const std::vector<Var>& styles, const InterceptPlan* intercepts = nullptr) const;

    std::vector<Var> synthesis_params() const { return synthesis_.vars(); }
    std::vector<Var> mapping_params() const { return mapping_.vars(); }
    std::vector<Var> all_params() const;

    const nn::ParamStore& mapping_store() const { return mapping_; }
    const nn::ParamStore& synthesis_store() const { return synthesis_; }
    nn::ParamStore& mapping_store() { return mapping_; }
    nn::ParamStore& synthesis_store() { return synthesis_; }

    GeneratorModel clone() const;

private:
    GeneratorConfig cfg_;
    nn::ParamStore mapping_;
    nn::ParamStore synthesis_;
    std::vector<int> channels_;   // per layer
    std::vector<bool> upsample_;  // per layer
    Var const_input_;
    struct LayerVars {
        Var conv_w, conv_b;
        Var style_scale_w, style_scale_b;
        Var style_shift_w, style_shift_b;
    };
    std::vector<LayerVars> layer_vars_;
    struct MapLayer {
        Var w, b;
    };
    std::vector<MapLayer> map_vars_;
    Var out_w_, out_b_;
};

struct SynthesisOutput {
    Tensor image;  // [3, S, S] in [-1, 1]
    std::vector<ActivationTensor> activations;  // L entries
};

// Random single-sample style code: z ~ N(0, I) through the mapping network,
// broadcast to all L rows.
StyleCode sample_wplus(const GeneratorModel& gen, uint64_t rng_seed);

// Single-sample synthesis with optional mid-forward edits.
SynthesisOutput synthesize(const GeneratorModel& gen, const StyleCode& code,
                           const InterceptPlan* intercepts = nullptr);

// Mean mapped style vector over n_draws latents; the inversion start point.
Tensor mean_style(const GeneratorModel& gen, int n_draws, uint64_t seed);

}  // namespace genaug::stylegen
