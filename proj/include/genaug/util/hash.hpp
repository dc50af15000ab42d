#pragma once

#include <cstdint>
#include <string>

namespace genaug::util {

// FNV-1a, used for content-addressed artifact directories and manifests.
// Not cryptographic; collisions are irrelevant at this scale.
uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t fnv1a_str(const std::string& s, uint64_t seed = 0xcbf29ce484222325ULL);
uint64_t fnv1a_file(const std::string& path);
std::string hash_hex(uint64_t h);

}  // namespace genaug::util
