#pragma once

#include <map>
#include <string>

#include "genaug/nn/tensor.hpp"

namespace genaug::nn {

// Named-tensor archive, the on-disk parameter format used by all checkpoints.
class ParamArchive {
public:
    void put(const std::string& name, const Tensor& t);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    size_t count() const { return entries_.size(); }
    const std::map<std::string, Tensor>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static ParamArchive load(const std::string& path);

private:
    std::map<std::string, Tensor> entries_;
};

// key: value manifest, one entry per line.
using Manifest = std::map<std::string, std::string>;
void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

}  // namespace genaug::nn
