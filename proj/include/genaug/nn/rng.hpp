#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace genaug::nn {

// Deterministic RNG used everywhere in the code base. The engine is the
// standard mt19937_64 (portable by specification); the distributions are
// implemented here because the std:: ones are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, two uniforms per draw, no cached second value.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(engine_() % static_cast<uint64_t>(hi - lo + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // splitmix64 step; used to derive independent per-item seeds from a base.
    static uint64_t derive(uint64_t base, uint64_t stream) {
        uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

class Tensor;
Tensor randn_tensor(std::vector<int> shape, Rng& rng, float stddev = 1.0f);

}  // namespace genaug::nn
