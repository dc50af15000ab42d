#include "genaug/nn/optim.hpp"

#include <cmath>

namespace genaug::nn {

void zero_grads(const std::vector<Var>& params) {
    for (const Var& p : params) {
        Node* n = p.node().get();
        if (n->grad.size() == n->value.size()) n->grad.fill(0.0f);
    }
}

Adam::Adam(std::vector<Var> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const Var& p : params_) {
        m_.push_back(Tensor::zeros(p.value().shape()));
        v_.push_back(Tensor::zeros(p.value().shape()));
    }
}

void Adam::step() {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
        Node* n = params_[i].node().get();
        if (n->grad.size() != n->value.size()) continue;  // no gradient this step
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int64_t j = 0; j < n->value.size(); ++j) {
            float g = n->grad[j];
            m[j] = static_cast<float>(beta1_ * m[j] + (1.0 - beta1_) * g);
            v[j] = static_cast<float>(beta2_ * v[j] + (1.0 - beta2_) * g * g);
            double mhat = m[j] / bc1;
            double vhat = v[j] / bc2;
            n->value[j] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

SgdMomentum::SgdMomentum(std::vector<Var> params, double lr, double momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
    for (const Var& p : params_) buf_.push_back(Tensor::zeros(p.value().shape()));
}

void SgdMomentum::step() {
    for (size_t i = 0; i < params_.size(); ++i) {
        Node* n = params_[i].node().get();
        if (n->grad.size() != n->value.size()) continue;
        Tensor& b = buf_[i];
        for (int64_t j = 0; j < n->value.size(); ++j) {
            b[j] = static_cast<float>(momentum_ * b[j] + n->grad[j]);
            n->value[j] -= static_cast<float>(lr_ * b[j]);
        }
    }
}

}  // namespace genaug::nn
