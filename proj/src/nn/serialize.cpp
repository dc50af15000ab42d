#include "genaug/nn/serialize.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace genaug::nn {

namespace {
constexpr char kMagic[8] = {'G', 'A', 'P', 'A', 'R', 'C', 'H', '1'};
}

void ParamArchive::put(const std::string& name, const Tensor& t) { entries_[name] = t; }

const Tensor& ParamArchive::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("archive: missing tensor '" + name + "'");
    return it->second;
}

void ParamArchive::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("archive: cannot open for write: " + path);
    f.write(kMagic, sizeof(kMagic));
    uint32_t count = static_cast<uint32_t>(entries_.size());
    f.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& [name, t] : entries_) {
        uint32_t nl = static_cast<uint32_t>(name.size());
        f.write(reinterpret_cast<const char*>(&nl), sizeof(nl));
        f.write(name.data(), nl);
        uint32_t rank = static_cast<uint32_t>(t.rank());
        f.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
        for (int i = 0; i < t.rank(); ++i) {
            uint32_t d = static_cast<uint32_t>(t.dim(i));
            f.write(reinterpret_cast<const char*>(&d), sizeof(d));
        }
        f.write(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
    }
    if (!f) throw std::runtime_error("archive: write failed: " + path);
}

ParamArchive ParamArchive::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("archive: cannot open: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("archive: bad magic in " + path);
    uint32_t count = 0;
    f.read(reinterpret_cast<char*>(&count), sizeof(count));
    ParamArchive a;
    for (uint32_t e = 0; e < count; ++e) {
        uint32_t nl = 0;
        f.read(reinterpret_cast<char*>(&nl), sizeof(nl));
        std::string name(nl, '\0');
        f.read(name.data(), nl);
        uint32_t rank = 0;
        f.read(reinterpret_cast<char*>(&rank), sizeof(rank));
        std::vector<int> shape(rank);
        for (uint32_t i = 0; i < rank; ++i) {
            uint32_t d = 0;
            f.read(reinterpret_cast<char*>(&d), sizeof(d));
            shape[i] = static_cast<int>(d);
        }
        Tensor t(shape);
        f.read(reinterpret_cast<char*>(t.data()), t.size() * sizeof(float));
        if (!f) throw std::runtime_error("archive: truncated file " + path);
        a.entries_[name] = std::move(t);
    }
    return a;
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("manifest: cannot open for write: " + path);
    for (const auto& [k, v] : m) f << k << ": " << v << "\n";
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("manifest: cannot open: " + path);
    Manifest m;
    std::string line;
    while (std::getline(f, line)) {
        auto pos = line.find(": ");
        if (pos == std::string::npos) continue;
        m[line.substr(0, pos)] = line.substr(pos + 2);
    }
    return m;
}

}  // namespace genaug::nn
