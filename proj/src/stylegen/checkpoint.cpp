#include "genaug/stylegen/checkpoint.hpp"

#include <filesystem>
#include <stdexcept>

#include "genaug/util/hash.hpp"

namespace genaug::stylegen {

namespace fs = std::filesystem;
using nn::Manifest;

namespace {

int manifest_int(const Manifest& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) throw std::runtime_error("checkpoint manifest: missing key '" + key + "'");
    return std::stoi(it->second);
}

uint64_t manifest_u64(const Manifest& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) throw std::runtime_error("checkpoint manifest: missing key '" + key + "'");
    return std::stoull(it->second);
}

void write_checkpoint(const nn::ParamArchive& arch, Manifest manifest, const std::string& dir) {
    fs::create_directories(dir);
    arch.save(dir + "/params.bin");
    nn::save_manifest(manifest, dir + "/manifest.txt");
}

}  // namespace

void save_generator(const GeneratorModel& gen, const std::string& dir, const Manifest& extra) {
    nn::ParamArchive arch;
    gen.mapping_store().save_into(arch);
    gen.synthesis_store().save_into(arch);
    Manifest m = extra;
    m["kind"] = "generator";
    m["layers"] = std::to_string(gen.config().layers);
    m["style_dim"] = std::to_string(gen.config().style_dim);
    m["latent_dim"] = std::to_string(gen.config().latent_dim);
    m["image_size"] = std::to_string(gen.config().image_size);
    m["base_channels"] = std::to_string(gen.config().base_channels);
    m["mapping_layers"] = std::to_string(gen.config().mapping_layers);
    m["init_seed"] = std::to_string(gen.config().init_seed);
    write_checkpoint(arch, m, dir);
}

GeneratorModel load_generator(const std::string& dir, Manifest* manifest_out) {
    Manifest m = nn::load_manifest(dir + "/manifest.txt");
    if (m.count("kind") && m.at("kind") != "generator")
        throw std::runtime_error("checkpoint at " + dir + " is not a generator");
    GeneratorConfig cfg;
    cfg.layers = manifest_int(m, "layers");
    cfg.style_dim = manifest_int(m, "style_dim");
    cfg.latent_dim = manifest_int(m, "latent_dim");
    cfg.image_size = manifest_int(m, "image_size");
    cfg.base_channels = manifest_int(m, "base_channels");
    cfg.mapping_layers = manifest_int(m, "mapping_layers");
    cfg.init_seed = manifest_u64(m, "init_seed");
    GeneratorModel gen(cfg);
    nn::ParamArchive arch = nn::ParamArchive::load(dir + "/params.bin");
    gen.mapping_store().load_from(arch);
    gen.synthesis_store().load_from(arch);
    if (manifest_out) *manifest_out = std::move(m);
    return gen;
}

void save_discriminator(const DiscriminatorModel& disc, const std::string& dir,
                        const Manifest& extra) {
    nn::ParamArchive arch;
    disc.store().save_into(arch);
    Manifest m = extra;
    m["kind"] = "discriminator";
    m["image_size"] = std::to_string(disc.config().image_size);
    m["base_channels"] = std::to_string(disc.config().base_channels);
    m["init_seed"] = std::to_string(disc.config().init_seed);
    write_checkpoint(arch, m, dir);
}

DiscriminatorModel load_discriminator(const std::string& dir, Manifest* manifest_out) {
    Manifest m = nn::load_manifest(dir + "/manifest.txt");
    if (m.count("kind") && m.at("kind") != "discriminator")
        throw std::runtime_error("checkpoint at " + dir + " is not a discriminator");
    DiscriminatorConfig cfg;
    cfg.image_size = manifest_int(m, "image_size");
    cfg.base_channels = manifest_int(m, "base_channels");
    cfg.init_seed = manifest_u64(m, "init_seed");
    DiscriminatorModel disc(cfg);
    nn::ParamArchive arch = nn::ParamArchive::load(dir + "/params.bin");
    disc.store().load_from(arch);
    if (manifest_out) *manifest_out = std::move(m);
    return disc;
}

std::string checkpoint_hash(const std::string& dir) {
    return util::hash_hex(util::fnv1a_file(dir + "/params.bin"));
}

}  // namespace genaug::stylegen
