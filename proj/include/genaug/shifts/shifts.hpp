#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genaug/nn/tensor.hpp"

namespace genaug::shifts {

using nn::Tensor;

enum class SplitTag { kSource, kTarget };

struct LabeledDataset {
    std::vector<Tensor> images;             // [3,S,S] in [-1,1]
    std::vector<std::vector<int>> labels;   // aligned with attribute_names
    std::vector<std::string> attribute_names;
    std::vector<SplitTag> split;

    int size() const { return static_cast<int>(images.size()); }
    int attribute_index(const std::string& name) const;

    LabeledDataset subset(SplitTag tag) const;
};

// Supported binary attributes of the procedural scenes. Every attribute has
// a 50% positive rate by construction.
const std::vector<std::string>& supported_attributes();

// n procedurally rendered scenes: a colored geometric object (circle or
// square) on a textured gradient background, with optional stripes and a
// dark outline. The first source_fraction of the indices are tagged source,
// the rest target.
LabeledDataset make_toy_dataset(int n, uint64_t seed, const std::vector<std::string>& schema,
                                int image_size = 32, double source_fraction = 0.6);

enum class Domain { kA, kB, kC };

std::string to_string(Domain d);
Domain domain_from_string(const std::string& s);

struct DomainShiftSpec {
    Domain domain = Domain::kC;
    double sigma_s = 40.0;                // spatial scale (pixels)
    double sigma_r = 0.2;                 // range scale in [0,1] intensity units
    double blur_sigma_fraction = 0.125;   // dodge blur sigma as a fraction of S
};

DomainShiftSpec default_shift_spec(Domain d);

// Deterministic, label-preserving image transforms emulating the three
// target domains. Input and output are [3,S,S] in [-1,1].
Tensor apply_shift(const Tensor& image, const DomainShiftSpec& spec);

// Applies the shift to every image; labels and split tags carry through.
LabeledDataset apply_shift(const LabeledDataset& ds, const DomainShiftSpec& spec, int threads = 1);

void save_labeled_dataset(const LabeledDataset& ds, const std::string& dir,
                          const std::string& domain_tag = "none");
LabeledDataset load_labeled_dataset(const std::string& dir);

}  // namespace genaug::shifts
