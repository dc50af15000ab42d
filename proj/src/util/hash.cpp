#include "genaug/util/hash.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace genaug::util {

uint64_t fnv1a(const void* data, size_t len, uint64_t seed) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a_str(const std::string& s, uint64_t seed) { return fnv1a(s.data(), s.size(), seed); }

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("fnv1a_file: cannot open " + path);
    std::vector<char> buf(1 << 16);
    uint64_t h = 0xcbf29ce484222325ULL;
    while (f) {
        f.read(buf.data(), static_cast<long>(buf.size()));
        h = fnv1a(buf.data(), static_cast<size_t>(f.gcount()), h);
    }
    return h;
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace genaug::util
