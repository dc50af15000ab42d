#include "genaug/nn/rng.hpp"

#include "genaug/nn/tensor.hpp"

namespace genaug::nn {

Tensor randn_tensor(std::vector<int> shape, Rng& rng, float stddev) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal()) * stddev;
    return t;
}

}  // namespace genaug::nn
