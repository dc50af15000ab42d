#pragma once

#include <string>
#include <utility>
#include <vector>

#include "genaug/nn/autodiff.hpp"
#include "genaug/nn/serialize.hpp"

namespace genaug::nn {

// Named trainable leaves owned by a model. Names double as archive keys.
class ParamStore {
public:
    Var add(const std::string& name, Tensor init) {
        Var v = parameter(std::move(init));
        items_.emplace_back(name, v);
        return v;
    }

    std::vector<Var> vars() const {
        std::vector<Var> out;
        out.reserve(items_.size());
        for (const auto& [name, v] : items_) out.push_back(v);
        return out;
    }

    const std::vector<std::pair<std::string, Var>>& items() const { return items_; }

    void save_into(ParamArchive& a, const std::string& prefix = "") const {
        for (const auto& [name, v] : items_) a.put(prefix + name, v.value());
    }

    void load_from(const ParamArchive& a, const std::string& prefix = "") {
        for (auto& [name, v] : items_) {
            const Tensor& t = a.get(prefix + name);
            if (!t.same_shape(v.value()))
                throw std::runtime_error("param " + name + ": shape mismatch on load");
            v.mutable_value() = t;
        }
    }

    // Frozen stores behave as constants in graphs: no gradient is computed
    // for or through-into them.
    void set_requires_grad(bool on) {
        for (auto& [name, v] : items_) v.node()->requires_grad = on;
    }

    void copy_values_from(const ParamStore& other) {
        if (other.items_.size() != items_.size())
            throw std::runtime_error("param store copy: size mismatch");
        for (size_t i = 0; i < items_.size(); ++i)
            items_[i].second.mutable_value() = other.items_[i].second.value();
    }

private:
    std::vector<std::pair<std::string, Var>> items_;
};

}  // namespace genaug::nn
