#include "genaug/cli/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "genaug/shifts/shifts.hpp"
#include "genaug/util/thread_pool.hpp"

namespace genaug::cli {

using nlohmann::json;

namespace {

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["artifact_root"] = c.artifact_root;
    j["threads"] = c.threads;
    j["seeds"] = c.seeds;
    j["attributes"] = c.attributes;
    j["domains"] = c.domains;
    j["methods"] = c.methods;
    j["data"] = {{"n", c.data.n},
                 {"seed", c.data.seed},
                 {"image_size", c.data.image_size},
                 {"source_fraction", c.data.source_fraction}};
    j["shift"] = {{"sigma_s", c.shift.sigma_s},
                  {"sigma_r_a", c.shift.sigma_r_a},
                  {"sigma_r_b", c.shift.sigma_r_b},
                  {"sigma_r_c", c.shift.sigma_r_c},
                  {"blur_sigma_fraction", c.shift.blur_sigma_fraction}};
    j["gan"] = {{"latent_dim", c.gan.latent_dim},
                {"style_dim", c.gan.style_dim},
                {"layers", c.gan.layers},
                {"base_channels", c.gan.base_channels},
                {"disc_channels", c.gan.disc_channels},
                {"steps", c.gan.steps},
                {"batch_size", c.gan.batch_size},
                {"lr", c.gan.lr},
                {"seed", c.gan.seed}};
    j["classifier"] = {{"epochs", c.classifier.epochs},
                       {"lr", c.classifier.lr},
                       {"batch_size", c.classifier.batch_size},
                       {"base_channels", c.classifier.base_channels},
                       {"feature_dim", c.classifier.feature_dim}};
    j["inversion"] = {{"steps", c.inversion.steps},
                      {"lr", c.inversion.lr},
                      {"feature_weight", c.inversion.feature_weight},
                      {"mean_style_draws", c.inversion.mean_style_draws}};
    j["finetune"] = {{"iterations", c.finetune.iterations},
                     {"lr", c.finetune.lr},
                     {"mix_start", c.finetune.mix_start},
                     {"norm", c.finetune.norm}};
    j["curate"] = {{"samples", c.curate.samples},
                   {"prune_zero_p", c.curate.prune_zero_p},
                   {"prune_rewind_p", c.curate.prune_rewind_p},
                   {"gate_probability", c.curate.gate_probability},
                   {"prune_start", c.curate.prune_start},
                   {"truncation_psi", c.curate.truncation_psi}};
    j["adapt"] = {{"k", c.adapt.k},
                  {"k_expanded", c.adapt.k_expanded},
                  {"lr", c.adapt.lr},
                  {"momentum", c.adapt.momentum},
                  {"epochs", c.adapt.epochs},
                  {"batch_size", c.adapt.batch_size},
                  {"diversity_weight", c.adapt.diversity_weight}};
    j["memo"] = {{"n_aug", c.memo.n_aug},
                 {"steps", c.memo.steps},
                 {"lr", c.memo.lr},
                 {"adapt_all", c.memo.adapt_all}};
    return j;
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    read_if(j, "schema_version", c.schema_version);
    if (c.schema_version != 1)
        throw std::runtime_error("config: unsupported schema_version " +
                                 std::to_string(c.schema_version));
    read_if(j, "artifact_root", c.artifact_root);
    read_if(j, "threads", c.threads);
    read_if(j, "seeds", c.seeds);
    read_if(j, "attributes", c.attributes);
    read_if(j, "domains", c.domains);
    read_if(j, "methods", c.methods);
    if (j.contains("data")) {
        const json& d = j.at("data");
        read_if(d, "n", c.data.n);
        read_if(d, "seed", c.data.seed);
        read_if(d, "image_size", c.data.image_size);
        read_if(d, "source_fraction", c.data.source_fraction);
    }
    if (j.contains("shift")) {
        const json& d = j.at("shift");
        read_if(d, "sigma_s", c.shift.sigma_s);
        read_if(d, "sigma_r_a", c.shift.sigma_r_a);
        read_if(d, "sigma_r_b", c.shift.sigma_r_b);
        read_if(d, "sigma_r_c", c.shift.sigma_r_c);
        read_if(d, "blur_sigma_fraction", c.shift.blur_sigma_fraction);
    }
    if (j.contains("gan")) {
        const json& d = j.at("gan");
        read_if(d, "latent_dim", c.gan.latent_dim);
        read_if(d, "style_dim", c.gan.style_dim);
        read_if(d, "layers", c.gan.layers);
        read_if(d, "base_channels", c.gan.base_channels);
        read_if(d, "disc_channels", c.gan.disc_channels);
        read_if(d, "steps", c.gan.steps);
        read_if(d, "batch_size", c.gan.batch_size);
        read_if(d, "lr", c.gan.lr);
        read_if(d, "seed", c.gan.seed);
    }
    if (j.contains("classifier")) {
        const json& d = j.at("classifier");
        read_if(d, "epochs", c.classifier.epochs);
        read_if(d, "lr", c.classifier.lr);
        read_if(d, "batch_size", c.classifier.batch_size);
        read_if(d, "base_channels", c.classifier.base_channels);
        read_if(d, "feature_dim", c.classifier.feature_dim);
    }
    if (j.contains("inversion")) {
        const json& d = j.at("inversion");
        read_if(d, "steps", c.inversion.steps);
        read_if(d, "lr", c.inversion.lr);
        read_if(d, "feature_weight", c.inversion.feature_weight);
        read_if(d, "mean_style_draws", c.inversion.mean_style_draws);
    }
    if (j.contains("finetune")) {
        const json& d = j.at("finetune");
        read_if(d, "iterations", c.finetune.iterations);
        read_if(d, "lr", c.finetune.lr);
        read_if(d, "mix_start", c.finetune.mix_start);
        read_if(d, "norm", c.finetune.norm);
    }
    if (j.contains("curate")) {
        const json& d = j.at("curate");
        read_if(d, "samples", c.curate.samples);
        read_if(d, "prune_zero_p", c.curate.prune_zero_p);
        read_if(d, "prune_rewind_p", c.curate.prune_rewind_p);
        read_if(d, "gate_probability", c.curate.gate_probability);
        read_if(d, "prune_start", c.curate.prune_start);
        read_if(d, "truncation_psi", c.curate.truncation_psi);
    }
    if (j.contains("adapt")) {
        const json& d = j.at("adapt");
        read_if(d, "k", c.adapt.k);
        read_if(d, "k_expanded", c.adapt.k_expanded);
        read_if(d, "lr", c.adapt.lr);
        read_if(d, "momentum", c.adapt.momentum);
        read_if(d, "epochs", c.adapt.epochs);
        read_if(d, "batch_size", c.adapt.batch_size);
        read_if(d, "diversity_weight", c.adapt.diversity_weight);
    }
    if (j.contains("memo")) {
        const json& d = j.at("memo");
        read_if(d, "n_aug", c.memo.n_aug);
        read_if(d, "steps", c.memo.steps);
        read_if(d, "lr", c.memo.lr);
        read_if(d, "adapt_all", c.memo.adapt_all);
    }
    return c;
}

}  // namespace

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> methods = {
        "source-only",   "memo-mixlike",      "memo-randconv", "synth-base",
        "synth-prune-zero", "synth-prune-rewind", "oracle"};
    return methods;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig config_from_json_text(const std::string& text) {
    return from_json(json::parse(text));
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must be key=value: " + assignment);
    std::string key = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);

    json j = to_json(cfg);
    json* node = &j;
    size_t pos = 0;
    while (true) {
        size_t dot = key.find('.', pos);
        std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (!node->contains(part))
            throw std::invalid_argument("override: unknown config key '" + key + "'");
        node = &(*node)[part];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = value;  // bare strings need no quotes
    }
    if (node->is_string() && !parsed.is_string())
        parsed = value;
    *node = parsed;
    cfg = from_json(j);
}

std::string canonical_config_json(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j.erase("artifact_root");
    j.erase("threads");
    return j.dump();
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    if (cfg.attributes.empty()) throw std::invalid_argument("config: attributes must be non-empty");
    const auto& known = shifts::supported_attributes();
    for (const auto& a : cfg.attributes)
        if (std::find(known.begin(), known.end(), a) == known.end())
            throw std::invalid_argument("config: unknown attribute '" + a + "'");
    if (cfg.domains.empty()) throw std::invalid_argument("config: domains must be non-empty");
    for (const auto& d : cfg.domains) shifts::domain_from_string(d);
    if (cfg.methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
    for (const auto& m : cfg.methods)
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
            throw std::invalid_argument("config: unknown method '" + m + "'");
    if (cfg.data.n < 10) throw std::invalid_argument("config: data.n too small");
    if (cfg.data.source_fraction <= 0.0 || cfg.data.source_fraction >= 1.0)
        throw std::invalid_argument("config: data.source_fraction must be in (0,1)");
    if (cfg.curate.samples < 1) throw std::invalid_argument("config: curate.samples must be >= 1");
    if (cfg.adapt.k < 1 || cfg.adapt.k_expanded < 1)
        throw std::invalid_argument("config: neighborhood sizes must be >= 1");
}

int resolve_threads(const ExperimentConfig& cfg) {
    return cfg.threads > 0 ? cfg.threads : util::default_threads();
}

}  // namespace genaug::cli
