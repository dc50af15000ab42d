#pragma once

#include <string>
#include <vector>

#include "genaug/nn/tensor.hpp"

namespace genaug::util {

// Images are [C,H,W] float tensors with values in [-1, 1] throughout the
// pipeline. PFM keeps the float values losslessly; PPM is the 8-bit view
// used for report figures.
void write_pfm(const std::string& path, const nn::Tensor& image);
nn::Tensor read_pfm(const std::string& path);

void write_ppm(const std::string& path, const nn::Tensor& image);

// Tiles [C,H,W] images into a rows x cols grid with a 2px separator.
nn::Tensor tile_images(const std::vector<nn::Tensor>& images, int cols);

}  // namespace genaug::util
