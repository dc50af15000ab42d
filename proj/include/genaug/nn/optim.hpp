#pragma once

#include <vector>

#include "genaug/nn/autodiff.hpp"

namespace genaug::nn {

void zero_grads(const std::vector<Var>& params);

class Adam {
public:
    Adam(std::vector<Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step();
    void zero_grad() { zero_grads(params_); }
    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }

private:
    std::vector<Var> params_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

class SgdMomentum {
public:
    SgdMomentum(std::vector<Var> params, double lr, double momentum = 0.9);

    void step();
    void zero_grad() { zero_grads(params_); }

private:
    std::vector<Var> params_;
    std::vector<Tensor> buf_;
    double lr_, momentum_;
};

}  // namespace genaug::nn
