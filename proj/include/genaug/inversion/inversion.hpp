#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genaug/stylegen/discriminator.hpp"
#include "genaug/stylegen/generator.hpp"

namespace genaug::inversion {

using nn::Tensor;
using stylegen::DiscriminatorModel;
using stylegen::GeneratorModel;
using stylegen::StyleCode;

struct InversionConfig {
    int steps = 500;
    double lr = 0.05;
    double feature_weight = 0.1;  // weight of the discriminator-feature term
    int mean_style_draws = 4096;  // draws for the mean-style initialization
    uint64_t rng_seed = 0;
};

struct InversionResult {
    StyleCode code;
    Tensor reconstruction;           // synthesize(gen, code)
    std::vector<double> loss_trace;  // length steps + 1, entry 0 is the init loss
};

// Direct latent optimization of a per-layer style code against a pixel L2
// plus discriminator-feature L1 reconstruction loss. Starts from the mean
// mapped style vector broadcast to all rows and returns the best code seen.
InversionResult invert(const GeneratorModel& gen, const DiscriminatorModel& disc,
                       const Tensor& target_image, const InversionConfig& cfg);

// code.txt (one row per layer), reconstruction.pfm, loss_trace.csv
void save_inversion(const InversionResult& result, const std::string& dir);
InversionResult load_inversion(const std::string& dir);

}  // namespace genaug::inversion
