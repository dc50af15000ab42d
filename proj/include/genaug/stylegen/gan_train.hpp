#pragma once

#include <array>
#include <string>
#include <vector>

#include "genaug/stylegen/discriminator.hpp"
#include "genaug/stylegen/generator.hpp"

namespace genaug::stylegen {

struct GanTrainConfig {
    GeneratorConfig gen;
    DiscriminatorConfig disc;
    int steps = 4000;
    int batch_size = 8;
    double lr = 1.5e-3;
    double adam_beta1 = 0.0;
    double adam_beta2 = 0.99;
    uint64_t seed = 11;
    int log_every = 50;
    std::string log_path;  // per-step loss CSV when non-empty
};

struct GanTrainResult {
    GeneratorModel gen;
    DiscriminatorModel disc;
    // (step, d_loss, g_loss, fake_min, fake_max) at logged steps
    std::vector<std::array<double, 5>> log;
};

// Adversarial training with the non-saturating loss. Aborts with a
// diagnostic if either loss goes non-finite.
GanTrainResult train_source_gan(const std::vector<nn::Tensor>& images, const GanTrainConfig& cfg);

}  // namespace genaug::stylegen
