#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace genaug::cli {

// Full experiment description. Serialized as JSON with a schema_version
// field; artifact_root and threads are execution parameters and stay out of
// the content hash.
struct ExperimentConfig {
    int schema_version = 1;
    std::string artifact_root = "artifacts";
    int threads = 0;  // 0 = hardware default

    std::vector<uint64_t> seeds = {0, 1, 2};
    std::vector<std::string> attributes = {"square", "large", "striped", "outlined"};
    std::vector<std::string> domains = {"A", "B", "C"};
    std::vector<std::string> methods = {"source-only",      "memo-mixlike",
                                        "memo-randconv",    "synth-base",
                                        "synth-prune-zero", "synth-prune-rewind",
                                        "oracle"};

    struct Data {
        int n = 1600;
        uint64_t seed = 7;
        int image_size = 32;
        double source_fraction = 0.6;
    } data;

    struct Shift {
        double sigma_s = 40.0;
        double sigma_r_a = 0.2;
        double sigma_r_b = 0.04;
        double sigma_r_c = 0.2;
        double blur_sigma_fraction = 0.125;
    } shift;

    struct Gan {
        int latent_dim = 64;
        int style_dim = 64;
        int layers = 8;
        int base_channels = 64;
        int disc_channels = 24;
        int steps = 4000;
        int batch_size = 8;
        double lr = 1.5e-3;
        uint64_t seed = 11;
    } gan;

    struct Classifier {
        int epochs = 30;
        double lr = 1e-4;
        int batch_size = 32;
        int base_channels = 8;
        int feature_dim = 48;
    } classifier;

    struct Inversion {
        int steps = 500;
        double lr = 0.05;
        double feature_weight = 0.1;
        int mean_style_draws = 4096;
    } inversion;

    struct Finetune {
        int iterations = 300;
        double lr = 2e-3;
        int mix_start = 0;  // 0 = derived from the layer count
        std::string norm = "l1";
    } finetune;

    struct Curate {
        int samples = 1000;
        double prune_zero_p = 50.0;
        double prune_rewind_p = 20.0;
        double gate_probability = 0.5;
        int prune_start = 0;  // 0 = same fraction as the mix boundary
        double truncation_psi = 1.0;  // 1 = no truncation
    } curate;

    struct Adapt {
        int k = 5;
        int k_expanded = 5;
        double lr = 1e-3;
        double momentum = 0.9;
        int epochs = 10;
        int batch_size = 64;
        double diversity_weight = 1.0;
    } adapt;

    struct Memo {
        int n_aug = 32;
        int steps = 1;
        double lr = 1e-4;
        bool adapt_all = true;
    } memo;
};

const std::vector<std::string>& known_methods();

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& cfg);

// key=value with dotted paths, e.g. "gan.steps=200" or "seeds=[0,1]".
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// JSON text with execution-only fields removed; the experiment identity used
// for content-addressed caching.
std::string canonical_config_json(const ExperimentConfig& cfg);

// Throws on structurally invalid configs (empty seeds, unknown method, ...).
void validate(const ExperimentConfig& cfg);

int resolve_threads(const ExperimentConfig& cfg);

}  // namespace genaug::cli
