#pragma once

#include "genaug/nn/autodiff.hpp"

namespace genaug::nn {

// Elementwise / scalar
Var add(const Var& a, const Var& b);        // same shape
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, float s);
Var add_scalar(const Var& a, float s);
Var neg(const Var& a);
Var abs_val(const Var& a);
Var square(const Var& a);
Var sqrt_eps(const Var& a, float eps = 0.0f);
Var rsqrt_eps(const Var& a, float eps);
Var log_eps(const Var& a, float eps = 1e-12f);
Var exp_val(const Var& a);

// Activations
Var leaky_relu(const Var& a, float slope = 0.2f);
Var tanh_val(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);

// Linear algebra
Var matmul(const Var& a, const Var& b);                       // [m,k]x[k,n]
Var linear(const Var& x, const Var& w, const Var& b);         // x[n,i], w[o,i], b[o] -> [n,o]

// Convolution, stride 1. kernel [K,C,kh,kw]; pad keeps spatial size for odd kernels.
Var conv2d(const Var& x, const Var& w, const Var& b, int pad);
Var upsample2x(const Var& x);   // nearest neighbour
Var avgpool2(const Var& x);     // 2x2, stride 2

// Reductions / broadcasts
Var reduce_sum(const Var& a);                      // -> scalar
Var reduce_mean(const Var& a);                     // -> scalar
Var spatial_mean(const Var& x);                    // [N,C,H,W] -> [N,C]
Var broadcast_spatial(const Var& s, int h, int w); // [N,C] -> [N,C,H,W]
Var channel_scale(const Var& x, const Var& s);     // x[N,C,H,W] * s[N,C]
Var channel_shift(const Var& x, const Var& t);     // x[N,C,H,W] + t[N,C]
Var mean_rows(const Var& x);                       // [n,k] -> [k]
Var rowwise_mean_square(const Var& x);             // [n,k] -> [n]
Var rowwise_scale(const Var& x, const Var& s);     // x[n,k] * s[n]

// Softmax / losses
Var softmax_rows(const Var& logits);                              // [n,k] -> [n,k]
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);  // mean CE
Var cross_entropy_soft(const Var& logits, const Tensor& targets); // targets [n,k], rows sum to 1
Var mse(const Var& a, const Var& b);
Var l1_sum(const Var& a, const Var& b);   // sum |a - b|
Var l2_norm(const Var& a, const Var& b);  // sqrt(sum (a-b)^2)

// Structure
Var reshape(const Var& a, std::vector<int> shape);
Var slice_row(const Var& x, int row);              // [L,D] -> [1,D]
Var row_normalize(const Var& x, float eps = 1e-8f);  // x / sqrt(mean(x^2) + eps), per row
Var repeat_batch(const Var& x, int n);             // [1,...] -> [n,...], grad sums copies

}  // namespace genaug::nn
