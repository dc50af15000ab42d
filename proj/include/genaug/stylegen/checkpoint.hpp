#pragma once

#include <string>

#include "genaug/nn/serialize.hpp"
#include "genaug/stylegen/discriminator.hpp"
#include "genaug/stylegen/generator.hpp"

namespace genaug::stylegen {

// A checkpoint is a directory holding params.bin (named-tensor archive) and
// manifest.txt (architecture dims plus free-form provenance fields). Loading
// rebuilds the model from the manifest and fails if the archive disagrees.
void save_generator(const GeneratorModel& gen, const std::string& dir,
                    const nn::Manifest& extra = {});
GeneratorModel load_generator(const std::string& dir, nn::Manifest* manifest_out = nullptr);

void save_discriminator(const DiscriminatorModel& disc, const std::string& dir,
                        const nn::Manifest& extra = {});
DiscriminatorModel load_discriminator(const std::string& dir, nn::Manifest* manifest_out = nullptr);

// Hash of the parameter archive; identifies a checkpoint in manifests.
std::string checkpoint_hash(const std::string& dir);

}  // namespace genaug::stylegen
