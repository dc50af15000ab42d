#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genaug/stylegen/generator.hpp"

namespace genaug::augsample {

using nn::Tensor;
using stylegen::ActivationTensor;
using stylegen::GeneratorModel;

enum class PruneStrategy { kBase, kPruneZero, kPruneRewind };

std::string to_string(PruneStrategy s);
PruneStrategy prune_strategy_from_string(const std::string& s);

struct PruneConfig {
    PruneStrategy strategy = PruneStrategy::kBase;
    double p = 50.0;              // percentile in [0, 100]
    int prune_start = 4;          // first layer eligible for pruning, 1-based
    double gate_probability = 0.5;
    double truncation_psi = 1.0;  // 1 = untruncated style draws
    uint64_t rng_seed = 0;
};

// Nearest-rank percentile: with the channel values sorted ascending as
// v[1..n], returns v[max(1, ceil(p*n/100))].
float channel_percentile(const float* values, int64_t count, double p);
float channel_percentile(const Tensor& channel, double p);

// Per channel k of act_t, entries strictly below that channel's percentile
// are zeroed (prune-zero) or replaced by the matching act_s entry
// (prune-rewind). Entries at or above the threshold are untouched.
ActivationTensor apply_prune(const ActivationTensor& act_t,
                             const ActivationTensor* act_s,
                             const PruneConfig& cfg);

struct SampleProvenance {
    uint64_t seed = 0;
    PruneStrategy strategy = PruneStrategy::kBase;
    double p = 0.0;
    std::vector<int> gated_layers;  // 1-based, ascending
};

struct Sample {
    Tensor image;  // [3,S,S]
    SampleProvenance provenance;
};

// One draw of the sampling procedure: a random style code, an independent
// per-layer gate for each layer in [prune_start, L], and a synthesis pass on
// gen_t with pruning intercepts on the gated layers. Source activations for
// prune-rewind come from a plain gen_s pass on the same code.
Sample sample_one(const GeneratorModel& gen_t, const GeneratorModel& gen_s,
                  const PruneConfig& cfg, uint64_t rng_seed);

struct SyntheticDataset {
    std::vector<Tensor> images;
    std::vector<SampleProvenance> provenance;
};

SyntheticDataset curate_dataset(const GeneratorModel& gen_t, const GeneratorModel& gen_s,
                                const PruneConfig& cfg, int m, int threads = 1);

// Dataset directory: %06d.pfm per sample, provenance.csv, images.manifest
// with the generator checkpoint hashes.
void save_dataset(const SyntheticDataset& ds, const std::string& dir,
                  const std::string& gen_t_hash, const std::string& gen_s_hash);
SyntheticDataset load_dataset(const std::string& dir);

}  // namespace genaug::augsample
