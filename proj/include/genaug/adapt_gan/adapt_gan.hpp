#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genaug/inversion/inversion.hpp"
#include "genaug/stylegen/discriminator.hpp"
#include "genaug/stylegen/generator.hpp"

namespace genaug::adapt_gan {

using nn::Tensor;
using nn::Var;
using stylegen::DiscriminatorModel;
using stylegen::GeneratorModel;
using stylegen::StyleCode;

enum class LossNorm { kL1, kL2 };

std::string to_string(LossNorm n);
LossNorm loss_norm_from_string(const std::string& s);

// The paper's 8-of-18 mix boundary expressed as a fraction of L.
int default_mix_start(int layers);

struct FinetuneConfig {
    int iterations = 300;             // N
    int mix_start = 0;                // 1-based; 0 selects default_mix_start(L)
    double lr = 2e-3;
    LossNorm norm = LossNorm::kL1;
    uint64_t rng_seed = 0;
    std::string loss_log_path;        // per-iteration CSV when non-empty
    std::string abort_checkpoint_dir; // last-good checkpoint on non-finite loss
};

// Rows [mix_start, L] of the code are replaced by r; rows below are copied
// bit-exactly. mix_start == L+1 leaves the code untouched.
StyleCode style_mix(const StyleCode& code, const Tensor& r, int mix_start);

// Sum over the discriminator's registered feature layers of the chosen norm
// of the feature difference between the two images.
double feature_match_loss(const DiscriminatorModel& disc, const Tensor& x_hat, const Tensor& x_t,
                          LossNorm norm);
// Graph form used inside the fine-tuning loop; x_hat is [1,3,S,S].
Var feature_match_loss_graph(const DiscriminatorModel& disc, const Var& x_hat, const Tensor& x_t,
                             LossNorm norm);

// Single-shot fine-tuning: per iteration a fresh random style row is mixed
// into the inverted code, the mixed latent is synthesized, and one gradient
// step is taken on the feature-matching loss against the target image. Only
// synthesis parameters move; the inputs are never mutated.
GeneratorModel finetune_single_shot(const GeneratorModel& gen_s, const DiscriminatorModel& disc_s,
                                    const Tensor& x_t, const inversion::InversionResult& inv,
                                    const FinetuneConfig& cfg,
                                    std::vector<double>* loss_log = nullptr);

}  // namespace genaug::adapt_gan
