#include "genaug/nn/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace genaug::nn {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using CMapM = Eigen::Map<const MatRM>;

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value()))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.value().shape_str() +
                                    " vs " + b.value().shape_str());
}

bool wants_grad(const NodePtr& n) { return n && n->requires_grad; }

}  // namespace

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    return make_op(std::move(out), {a.node(), b.node()}, [](Node& n) {
        for (auto& p : n.parents) {
            if (!wants_grad(p)) continue;
            Tensor& g = p->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return make_op(std::move(out), {a.node(), b.node()}, [](Node& n) {
        if (wants_grad(n.parents[0])) {
            Tensor& g = n.parents[0]->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (wants_grad(n.parents[1])) {
            Tensor& g = n.parents[1]->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] -= n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a.value();
    const Tensor& bv = b.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return make_op(std::move(out), {a.node(), b.node()}, [](Node& n) {
        const Tensor& av = n.parents[0]->value;
        const Tensor& bv2 = n.parents[1]->value;
        if (wants_grad(n.parents[0])) {
            Tensor& g = n.parents[0]->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * bv2[i];
        }
        if (wants_grad(n.parents[1])) {
            Tensor& g = n.parents[1]->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * av[i];
        }
    });
}

Var scale(const Var& a, float s) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= s;
    return make_op(std::move(out), {a.node()}, [s](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
    });
}

Var add_scalar(const Var& a, float s) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] += s;
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    });
}

Var neg(const Var& a) { return scale(a, -1.0f); }

Var abs_val(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::fabs(out[i]);
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        const Tensor& x = n.parents[0]->value;
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) {
            float s = x[i] > 0.0f ? 1.0f : (x[i] < 0.0f ? -1.0f : 0.0f);
            g[i] += s * n.grad[i];
        }
    });
}

Var square(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= out[i];
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        const Tensor& x = n.parents[0]->value;
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += 2.0f * x[i] * n.grad[i];
    });
}

Var sqrt_eps(const Var& a, float eps) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i] + eps);
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) {
            float y = n.value[i];
            g[i] += (y > 0.0f ? 0.5f / y : 0.0f) * n.grad[i];
        }
    });
}

Var rsqrt_eps(const Var& a, float eps) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0f / std::sqrt(out[i] + eps);
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) {
            float y = n.value[i];
            g[i] += -0.5f * y * y * y * n.grad[i];
        }
    });
}

Var log_eps(const Var& a, float eps) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i] + eps);
    return make_op(std::move(out), {a.node()}, [eps](Node& n) {
        const Tensor& x = n.parents[0]->value;
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] / (x[i] + eps);
    });
}

Var exp_val(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += n.value[i] * n.grad[i];
    });
}

Var leaky_relu(const Var& a, float slope) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i)
        if (out[i] < 0.0f) out[i] *= slope;
    return make_op(std::move(out), {a.node()}, [slope](Node& n) {
        const Tensor& x = n.parents[0]->value;
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += (x[i] > 0.0f ? 1.0f : slope) * n.grad[i];
    });
}

Var tanh_val(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) {
            float y = n.value[i];
            g[i] += (1.0f - y * y) * n.grad[i];
        }
    });
}

Var sigmoid(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0f / (1.0f + std::exp(-out[i]));
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) {
            float y = n.value[i];
            g[i] += y * (1.0f - y) * n.grad[i];
        }
    });
}

Var softplus(const Var& a) {
    Tensor out = a.value();
    for (int64_t i = 0; i < out.size(); ++i) {
        float x = out[i];
        out[i] = (x > 0.0f ? x : 0.0f) + std::log1p(std::exp(-std::fabs(x)));
    }
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        const Tensor& x = n.parents[0]->value;
        Tensor& g = n.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i)
            g[i] += n.grad[i] / (1.0f + std::exp(-x[i]));
    });
}

Var matmul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0))
        throw std::invalid_argument("matmul: bad shapes " + av.shape_str() + " x " + bv.shape_str());
    int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    Tensor out({m, n});
    MapM(out.data(), m, n).noalias() = CMapM(av.data(), m, k) * CMapM(bv.data(), k, n);
    return make_op(std::move(out), {a.node(), b.node()}, [m, k, n](Node& nd) {
        CMapM G(nd.grad.data(), m, n);
        CMapM A(nd.parents[0]->value.data(), m, k);
        CMapM B(nd.parents[1]->value.data(), k, n);
        if (wants_grad(nd.parents[0]))
            MapM(nd.parents[0]->ensure_grad().data(), m, k).noalias() += G * B.transpose();
        if (wants_grad(nd.parents[1]))
            MapM(nd.parents[1]->ensure_grad().data(), k, n).noalias() += A.transpose() * G;
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(1) || bv.size() != wv.dim(0))
        throw std::invalid_argument("linear: bad shapes " + xv.shape_str() + ", " + wv.shape_str());
    int n = xv.dim(0), in = xv.dim(1), o = wv.dim(0);
    Tensor out({n, o});
    MapM Y(out.data(), n, o);
    Y.noalias() = CMapM(xv.data(), n, in) * CMapM(wv.data(), o, in).transpose();
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(bv.data(), o);
    return make_op(std::move(out), {x.node(), w.node(), b.node()}, [n, in, o](Node& nd) {
        CMapM G(nd.grad.data(), n, o);
        CMapM X(nd.parents[0]->value.data(), n, in);
        CMapM W(nd.parents[1]->value.data(), o, in);
        if (wants_grad(nd.parents[0]))
            MapM(nd.parents[0]->ensure_grad().data(), n, in).noalias() += G * W;
        if (wants_grad(nd.parents[1]))
            MapM(nd.parents[1]->ensure_grad().data(), o, in).noalias() += G.transpose() * X;
        if (wants_grad(nd.parents[2])) {
            // Fixed-order accumulation keeps the result address-independent.
            Tensor& gb = nd.parents[2]->ensure_grad();
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < o; ++c) gb[c] += nd.grad[static_cast<int64_t>(r) * o + c];
        }
    });
}

namespace {

// col: [C*kh*kw, OH*OW] for one batch item.
void im2col(const float* x, int C, int H, int W, int kh, int kw, int pad, float* col, int OH, int OW) {
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                float* dst = col + (static_cast<int64_t>(c) * kh * kw + i * kw + j) * OH * OW;
                for (int oh = 0; oh < OH; ++oh) {
                    int ih = oh + i - pad;
                    if (ih < 0 || ih >= H) {
                        std::fill(dst, dst + OW, 0.0f);
                        dst += OW;
                        continue;
                    }
                    const float* src = x + (static_cast<int64_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        int iw = ow + j - pad;
                        *dst++ = (iw >= 0 && iw < W) ? src[iw] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im_acc(const float* col, int C, int H, int W, int kh, int kw, int pad, float* gx, int OH, int OW) {
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < kh; ++i) {
            for (int j = 0; j < kw; ++j) {
                const float* src = col + (static_cast<int64_t>(c) * kh * kw + i * kw + j) * OH * OW;
                for (int oh = 0; oh < OH; ++oh) {
                    int ih = oh + i - pad;
                    if (ih < 0 || ih >= H) {
                        src += OW;
                        continue;
                    }
                    float* dst = gx + (static_cast<int64_t>(c) * H + ih) * W;
                    for (int ow = 0; ow < OW; ++ow) {
                        int iw = ow + j - pad;
                        if (iw >= 0 && iw < W) dst[iw] += src[ow];
                    }
                    src += OW;
                }
            }
        }
    }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int pad) {
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    if (xv.rank() != 4 || wv.rank() != 4 || xv.dim(1) != wv.dim(1))
        throw std::invalid_argument("conv2d: bad shapes " + xv.shape_str() + ", " + wv.shape_str());
    int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    int K = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
    int OH = H + 2 * pad - kh + 1, OW = W + 2 * pad - kw + 1;
    if (OH <= 0 || OW <= 0) throw std::invalid_argument("conv2d: kernel larger than padded input");
    if (b.value().size() != K) throw std::invalid_argument("conv2d: bias size mismatch");
    int ckk = C * kh * kw;

    Tensor out({N, K, OH, OW});
    Tensor col({ckk, OH * OW});
    CMapM Wm(wv.data(), K, ckk);
    for (int n = 0; n < N; ++n) {
        im2col(xv.data() + static_cast<int64_t>(n) * C * H * W, C, H, W, kh, kw, pad, col.data(), OH, OW);
        MapM Y(out.data() + static_cast<int64_t>(n) * K * OH * OW, K, OH * OW);
        Y.noalias() = Wm * CMapM(col.data(), ckk, OH * OW);
        Y.colwise() += Eigen::Map<const Eigen::VectorXf>(b.value().data(), K);
    }

    return make_op(std::move(out), {x.node(), w.node(), b.node()},
                   [N, C, H, W, K, kh, kw, pad, OH, OW, ckk](Node& nd) {
        const Tensor& xin = nd.parents[0]->value;
        const Tensor& win = nd.parents[1]->value;
        bool need_x = wants_grad(nd.parents[0]);
        bool need_w = wants_grad(nd.parents[1]);
        bool need_b = wants_grad(nd.parents[2]);
        Tensor col({ckk, OH * OW});
        Tensor dcol({ckk, OH * OW});
        CMapM Wm(win.data(), K, ckk);
        for (int n = 0; n < N; ++n) {
            CMapM G(nd.grad.data() + static_cast<int64_t>(n) * K * OH * OW, K, OH * OW);
            if (need_w || need_x)
                im2col(xin.data() + static_cast<int64_t>(n) * C * H * W, C, H, W, kh, kw, pad,
                       col.data(), OH, OW);
            if (need_w)
                MapM(nd.parents[1]->ensure_grad().data(), K, ckk).noalias() +=
                    G * CMapM(col.data(), ckk, OH * OW).transpose();
            if (need_b) {
                Tensor& gb = nd.parents[2]->ensure_grad();
                const float* gsrc = nd.grad.data() + static_cast<int64_t>(n) * K * OH * OW;
                for (int k = 0; k < K; ++k) {
                    double acc = 0.0;
                    const float* row = gsrc + static_cast<int64_t>(k) * OH * OW;
                    for (int i = 0; i < OH * OW; ++i) acc += row[i];
                    gb[k] += static_cast<float>(acc);
                }
            }
            if (need_x) {
                MapM(dcol.data(), ckk, OH * OW).noalias() = Wm.transpose() * G;
                col2im_acc(dcol.data(), C, H, W, kh, kw, pad,
                           nd.parents[0]->ensure_grad().data() + static_cast<int64_t>(n) * C * H * W,
                           OH, OW);
            }
        }
    });
}

Var upsample2x(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 4) throw std::invalid_argument("upsample2x: expects NCHW");
    int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
    Tensor out({N, C, 2 * H, 2 * W});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < H; ++h) {
                const float* src = xv.data() + ((static_cast<int64_t>(n) * C + c) * H + h) * W;
                float* d0 = out.data() + ((static_cast<int64_t>(n) * C + c) * 2 * H + 2 * h) * 2 * W;
                float* d1 = d0 + 2 * W;
                for (int w = 0; w < W; ++w) {
                    d0[2 * w] = d0[2 * w + 1] = d1[2 * w] = d1[2 * w + 1] = src[w];
                }
            }
    return make_op(std::move(out), {x.node()}, [N, C, H, W](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int h = 0; h < H; ++h) {
                    float* dst = g.data() + ((static_cast<int64_t>(n) * C + c) * H + h) * W;
                    const float* s0 =
                        nd.grad.data() + ((static_cast<int64_t>(n) * C + c) * 2 * H + 2 * h) * 2 * W;
                    const float* s1 = s0 + 2 * W;
                    for (int w = 0; w < W; ++w)
                        dst[w] += s0[2 * w] + s0[2 * w + 1] + s1[2 * w] + s1[2 * w + 1];
                }
    });
}

Var avgpool2(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 4 || xv.dim(2) % 2 || xv.dim(3) % 2)
        throw std::invalid_argument("avgpool2: expects NCHW with even spatial dims");
    int N = xv.dim(0), C = xv.dim(1), H = xv.dim(2) / 2, W = xv.dim(3) / 2;
    Tensor out({N, C, H, W});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int h = 0; h < H; ++h) {
                const float* s0 = xv.data() + ((static_cast<int64_t>(n) * C + c) * 2 * H + 2 * h) * 2 * W;
                const float* s1 = s0 + 2 * W;
                float* dst = out.data() + ((static_cast<int64_t>(n) * C + c) * H + h) * W;
                for (int w = 0; w < W; ++w)
                    dst[w] = 0.25f * (s0[2 * w] + s0[2 * w + 1] + s1[2 * w] + s1[2 * w + 1]);
            }
    return make_op(std::move(out), {x.node()}, [N, C, H, W](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int h = 0; h < H; ++h) {
                    float* d0 = g.data() + ((static_cast<int64_t>(n) * C + c) * 2 * H + 2 * h) * 2 * W;
                    float* d1 = d0 + 2 * W;
                    const float* src = nd.grad.data() + ((static_cast<int64_t>(n) * C + c) * H + h) * W;
                    for (int w = 0; w < W; ++w) {
                        float v = 0.25f * src[w];
                        d0[2 * w] += v;
                        d0[2 * w + 1] += v;
                        d1[2 * w] += v;
                        d1[2 * w + 1] += v;
                    }
                }
    });
}

Var reduce_sum(const Var& a) {
    Tensor out = Tensor::scalar(static_cast<float>(a.value().sum()));
    return make_op(std::move(out), {a.node()}, [](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        float gv = n.grad[0];
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gv;
    });
}

Var reduce_mean(const Var& a) {
    int64_t sz = a.value().size();
    Tensor out = Tensor::scalar(static_cast<float>(a.value().sum() / static_cast<double>(sz)));
    return make_op(std::move(out), {a.node()}, [sz](Node& n) {
        Tensor& g = n.parents[0]->ensure_grad();
        float gv = n.grad[0] / static_cast<float>(sz);
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gv;
    });
}

Var spatial_mean(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 4) throw std::invalid_argument("spatial_mean: expects NCHW");
    int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out({N, C});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const float* src = xv.data() + (static_cast<int64_t>(n) * C + c) * HW;
            double s = 0.0;
            for (int i = 0; i < HW; ++i) s += src[i];
            out.at(n, c) = static_cast<float>(s / HW);
        }
    return make_op(std::move(out), {x.node()}, [N, C, HW](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                float gv = nd.grad.at(n, c) / static_cast<float>(HW);
                float* dst = g.data() + (static_cast<int64_t>(n) * C + c) * HW;
                for (int i = 0; i < HW; ++i) dst[i] += gv;
            }
    });
}

Var broadcast_spatial(const Var& s, int h, int w) {
    const Tensor& sv = s.value();
    if (sv.rank() != 2) throw std::invalid_argument("broadcast_spatial: expects [N,C]");
    int N = sv.dim(0), C = sv.dim(1), HW = h * w;
    Tensor out({N, C, h, w});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            float v = sv.at(n, c);
            float* dst = out.data() + (static_cast<int64_t>(n) * C + c) * HW;
            for (int i = 0; i < HW; ++i) dst[i] = v;
        }
    return make_op(std::move(out), {s.node()}, [N, C, HW](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const float* src = nd.grad.data() + (static_cast<int64_t>(n) * C + c) * HW;
                double acc = 0.0;
                for (int i = 0; i < HW; ++i) acc += src[i];
                g.at(n, c) += static_cast<float>(acc);
            }
    });
}

Var channel_scale(const Var& x, const Var& s) {
    const Tensor& xv = x.value();
    const Tensor& sv = s.value();
    if (xv.rank() != 4 || sv.rank() != 2 || sv.dim(0) != xv.dim(0) || sv.dim(1) != xv.dim(1))
        throw std::invalid_argument("channel_scale: shape mismatch");
    int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out = xv;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            float v = sv.at(n, c);
            float* dst = out.data() + (static_cast<int64_t>(n) * C + c) * HW;
            for (int i = 0; i < HW; ++i) dst[i] *= v;
        }
    return make_op(std::move(out), {x.node(), s.node()}, [N, C, HW](Node& nd) {
        const Tensor& xin = nd.parents[0]->value;
        const Tensor& sin = nd.parents[1]->value;
        if (wants_grad(nd.parents[0])) {
            Tensor& g = nd.parents[0]->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    float v = sin.at(n, c);
                    int64_t base = (static_cast<int64_t>(n) * C + c) * HW;
                    for (int i = 0; i < HW; ++i) g[base + i] += v * nd.grad[base + i];
                }
        }
        if (wants_grad(nd.parents[1])) {
            Tensor& g = nd.parents[1]->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    int64_t base = (static_cast<int64_t>(n) * C + c) * HW;
                    double acc = 0.0;
                    for (int i = 0; i < HW; ++i)
                        acc += static_cast<double>(nd.grad[base + i]) * xin[base + i];
                    g.at(n, c) += static_cast<float>(acc);
                }
        }
    });
}

Var channel_shift(const Var& x, const Var& t) {
    const Tensor& xv = x.value();
    const Tensor& tv = t.value();
    if (xv.rank() != 4 || tv.rank() != 2 || tv.dim(0) != xv.dim(0) || tv.dim(1) != xv.dim(1))
        throw std::invalid_argument("channel_shift: shape mismatch");
    int N = xv.dim(0), C = xv.dim(1), HW = xv.dim(2) * xv.dim(3);
    Tensor out = xv;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            float v = tv.at(n, c);
            float* dst = out.data() + (static_cast<int64_t>(n) * C + c) * HW;
            for (int i = 0; i < HW; ++i) dst[i] += v;
        }
    return make_op(std::move(out), {x.node(), t.node()}, [N, C, HW](Node& nd) {
        if (wants_grad(nd.parents[0])) {
            Tensor& g = nd.parents[0]->ensure_grad();
            for (int64_t i = 0; i < g.size(); ++i) g[i] += nd.grad[i];
        }
        if (wants_grad(nd.parents[1])) {
            Tensor& g = nd.parents[1]->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    int64_t base = (static_cast<int64_t>(n) * C + c) * HW;
                    double acc = 0.0;
                    for (int i = 0; i < HW; ++i) acc += nd.grad[base + i];
                    g.at(n, c) += static_cast<float>(acc);
                }
        }
    });
}

Var mean_rows(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw std::invalid_argument("mean_rows: expects [n,k]");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor out({k});
    for (int j = 0; j < k; ++j) {
        double s = 0.0;
        for (int r = 0; r < n; ++r) s += xv.at(r, j);
        out[j] = static_cast<float>(s / n);
    }
    return make_op(std::move(out), {x.node()}, [n, k](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < k; ++j) g.at(r, j) += nd.grad[j] / static_cast<float>(n);
    });
}

Var rowwise_mean_square(const Var& x) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw std::invalid_argument("rowwise_mean_square: expects [n,k]");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor out({n});
    for (int r = 0; r < n; ++r) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += static_cast<double>(xv.at(r, j)) * xv.at(r, j);
        out[r] = static_cast<float>(s / k);
    }
    return make_op(std::move(out), {x.node()}, [n, k](Node& nd) {
        const Tensor& xin = nd.parents[0]->value;
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int r = 0; r < n; ++r) {
            float gv = 2.0f * nd.grad[r] / static_cast<float>(k);
            for (int j = 0; j < k; ++j) g.at(r, j) += gv * xin.at(r, j);
        }
    });
}

Var rowwise_scale(const Var& x, const Var& s) {
    const Tensor& xv = x.value();
    const Tensor& sv = s.value();
    if (xv.rank() != 2 || sv.rank() != 1 || sv.dim(0) != xv.dim(0))
        throw std::invalid_argument("rowwise_scale: shape mismatch");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor out = xv;
    for (int r = 0; r < n; ++r) {
        float v = sv[r];
        for (int j = 0; j < k; ++j) out.at(r, j) *= v;
    }
    return make_op(std::move(out), {x.node(), s.node()}, [n, k](Node& nd) {
        const Tensor& xin = nd.parents[0]->value;
        const Tensor& sin = nd.parents[1]->value;
        if (wants_grad(nd.parents[0])) {
            Tensor& g = nd.parents[0]->ensure_grad();
            for (int r = 0; r < n; ++r) {
                float v = sin[r];
                for (int j = 0; j < k; ++j) g.at(r, j) += v * nd.grad.at(r, j);
            }
        }
        if (wants_grad(nd.parents[1])) {
            Tensor& g = nd.parents[1]->ensure_grad();
            for (int r = 0; r < n; ++r) {
                double acc = 0.0;
                for (int j = 0; j < k; ++j)
                    acc += static_cast<double>(nd.grad.at(r, j)) * xin.at(r, j);
                g[r] += static_cast<float>(acc);
            }
        }
    });
}

Var softmax_rows(const Var& logits) {
    const Tensor& xv = logits.value();
    if (xv.rank() != 2) throw std::invalid_argument("softmax_rows: expects [n,k]");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor out({n, k});
    for (int r = 0; r < n; ++r) {
        float mx = xv.at(r, 0);
        for (int j = 1; j < k; ++j) mx = std::max(mx, xv.at(r, j));
        double z = 0.0;
        for (int j = 0; j < k; ++j) {
            float e = std::exp(xv.at(r, j) - mx);
            out.at(r, j) = e;
            z += e;
        }
        for (int j = 0; j < k; ++j) out.at(r, j) = static_cast<float>(out.at(r, j) / z);
    }
    return make_op(std::move(out), {logits.node()}, [n, k](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int r = 0; r < n; ++r) {
            double dot = 0.0;
            for (int j = 0; j < k; ++j)
                dot += static_cast<double>(nd.grad.at(r, j)) * nd.value.at(r, j);
            for (int j = 0; j < k; ++j)
                g.at(r, j) += nd.value.at(r, j) * (nd.grad.at(r, j) - static_cast<float>(dot));
        }
    });
}

namespace {

// Stable log-softmax into `lsm`; also writes softmax into `sm` if non-null.
void log_softmax_rows(const Tensor& x, Tensor& lsm, Tensor* sm) {
    int n = x.dim(0), k = x.dim(1);
    for (int r = 0; r < n; ++r) {
        float mx = x.at(r, 0);
        for (int j = 1; j < k; ++j) mx = std::max(mx, x.at(r, j));
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(static_cast<double>(x.at(r, j)) - mx);
        float lz = mx + static_cast<float>(std::log(z));
        for (int j = 0; j < k; ++j) {
            float v = x.at(r, j) - lz;
            lsm.at(r, j) = v;
            if (sm) sm->at(r, j) = std::exp(v);
        }
    }
}

}  // namespace

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
    const Tensor& xv = logits.value();
    if (xv.rank() != 2 || static_cast<int>(labels.size()) != xv.dim(0))
        throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor lsm({n, k});
    Tensor sm({n, k});
    log_softmax_rows(xv, lsm, &sm);
    double loss = 0.0;
    for (int r = 0; r < n; ++r) loss -= lsm.at(r, labels[static_cast<size_t>(r)]);
    Tensor out = Tensor::scalar(static_cast<float>(loss / n));
    return make_op(std::move(out), {logits.node()}, [n, k, sm, labels](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        float gv = nd.grad[0] / static_cast<float>(n);
        for (int r = 0; r < n; ++r)
            for (int j = 0; j < k; ++j) {
                float t = (labels[static_cast<size_t>(r)] == j) ? 1.0f : 0.0f;
                g.at(r, j) += gv * (sm.at(r, j) - t);
            }
    });
}

Var cross_entropy_soft(const Var& logits, const Tensor& targets) {
    const Tensor& xv = logits.value();
    if (xv.rank() != 2 || !xv.same_shape(targets))
        throw std::invalid_argument("cross_entropy_soft: shape mismatch");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor lsm({n, k});
    Tensor sm({n, k});
    log_softmax_rows(xv, lsm, &sm);
    double loss = 0.0;
    for (int64_t i = 0; i < lsm.size(); ++i) loss -= static_cast<double>(targets[i]) * lsm[i];
    Tensor out = Tensor::scalar(static_cast<float>(loss / n));
    return make_op(std::move(out), {logits.node()}, [n, sm, targets](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        float gv = nd.grad[0] / static_cast<float>(n);
        for (int64_t i = 0; i < g.size(); ++i) g[i] += gv * (sm[i] - targets[i]);
    });
}

Var mse(const Var& a, const Var& b) {
    check_same_shape(a, b, "mse");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    int64_t sz = av.size();
    double s = 0.0;
    for (int64_t i = 0; i < sz; ++i) {
        double d = static_cast<double>(av[i]) - bv[i];
        s += d * d;
    }
    Tensor out = Tensor::scalar(static_cast<float>(s / static_cast<double>(sz)));
    return make_op(std::move(out), {a.node(), b.node()}, [sz](Node& nd) {
        const Tensor& av2 = nd.parents[0]->value;
        const Tensor& bv2 = nd.parents[1]->value;
        float gv = 2.0f * nd.grad[0] / static_cast<float>(sz);
        if (wants_grad(nd.parents[0])) {
            Tensor& g = nd.parents[0]->ensure_grad();
            for (int64_t i = 0; i < sz; ++i) g[i] += gv * (av2[i] - bv2[i]);
        }
        if (wants_grad(nd.parents[1])) {
            Tensor& g = nd.parents[1]->ensure_grad();
            for (int64_t i = 0; i < sz; ++i) g[i] -= gv * (av2[i] - bv2[i]);
        }
    });
}

Var l1_sum(const Var& a, const Var& b) {
    check_same_shape(a, b, "l1_sum");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    double s = 0.0;
    for (int64_t i = 0; i < av.size(); ++i) s += std::fabs(static_cast<double>(av[i]) - bv[i]);
    Tensor out = Tensor::scalar(static_cast<float>(s));
    return make_op(std::move(out), {a.node(), b.node()}, [](Node& nd) {
        const Tensor& av2 = nd.parents[0]->value;
        const Tensor& bv2 = nd.parents[1]->value;
        float gv = nd.grad[0];
        Tensor* ga = wants_grad(nd.parents[0]) ? &nd.parents[0]->ensure_grad() : nullptr;
        Tensor* gb = wants_grad(nd.parents[1]) ? &nd.parents[1]->ensure_grad() : nullptr;
        for (int64_t i = 0; i < av2.size(); ++i) {
            float d = av2[i] - bv2[i];
            float sgn = d > 0.0f ? 1.0f : (d < 0.0f ? -1.0f : 0.0f);
            if (ga) (*ga)[i] += gv * sgn;
            if (gb) (*gb)[i] -= gv * sgn;
        }
    });
}

Var l2_norm(const Var& a, const Var& b) {
    check_same_shape(a, b, "l2_norm");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    double s = 0.0;
    for (int64_t i = 0; i < av.size(); ++i) {
        double d = static_cast<double>(av[i]) - bv[i];
        s += d * d;
    }
    float norm = static_cast<float>(std::sqrt(s));
    Tensor out = Tensor::scalar(norm);
    return make_op(std::move(out), {a.node(), b.node()}, [](Node& nd) {
        const Tensor& av2 = nd.parents[0]->value;
        const Tensor& bv2 = nd.parents[1]->value;
        float norm2 = nd.value[0];
        if (norm2 <= 0.0f) return;
        float gv = nd.grad[0] / norm2;
        Tensor* ga = wants_grad(nd.parents[0]) ? &nd.parents[0]->ensure_grad() : nullptr;
        Tensor* gb = wants_grad(nd.parents[1]) ? &nd.parents[1]->ensure_grad() : nullptr;
        for (int64_t i = 0; i < av2.size(); ++i) {
            float d = av2[i] - bv2[i];
            if (ga) (*ga)[i] += gv * d;
            if (gb) (*gb)[i] -= gv * d;
        }
    });
}

Var reshape(const Var& a, std::vector<int> shape) {
    Tensor out = a.value().reshaped(shape);
    return make_op(std::move(out), {a.node()}, [](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int64_t i = 0; i < g.size(); ++i) g[i] += nd.grad[i];
    });
}

Var slice_row(const Var& x, int row) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2 || row < 0 || row >= xv.dim(0))
        throw std::invalid_argument("slice_row: bad row index");
    int k = xv.dim(1);
    Tensor out({1, k});
    for (int j = 0; j < k; ++j) out[j] = xv.at(row, j);
    return make_op(std::move(out), {x.node()}, [row, k](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int j = 0; j < k; ++j) g.at(row, j) += nd.grad[j];
    });
}

Var repeat_batch(const Var& x, int n) {
    const Tensor& xv = x.value();
    if (xv.rank() < 1 || xv.dim(0) != 1)
        throw std::invalid_argument("repeat_batch: leading dim must be 1");
    std::vector<int> shape = xv.shape();
    shape[0] = n;
    int64_t item = xv.size();
    Tensor out(shape);
    for (int r = 0; r < n; ++r)
        std::copy(xv.data(), xv.data() + item, out.data() + r * item);
    return make_op(std::move(out), {x.node()}, [n, item](Node& nd) {
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int r = 0; r < n; ++r) {
            const float* src = nd.grad.data() + r * item;
            for (int64_t i = 0; i < item; ++i) g[i] += src[i];
        }
    });
}

Var row_normalize(const Var& x, float eps) {
    const Tensor& xv = x.value();
    if (xv.rank() != 2) throw std::invalid_argument("row_normalize: expects [n,k]");
    int n = xv.dim(0), k = xv.dim(1);
    Tensor out({n, k});
    Tensor inv({n});
    for (int r = 0; r < n; ++r) {
        double m = 0.0;
        for (int j = 0; j < k; ++j) m += static_cast<double>(xv.at(r, j)) * xv.at(r, j);
        float iv = 1.0f / std::sqrt(static_cast<float>(m / k) + eps);
        inv[r] = iv;
        for (int j = 0; j < k; ++j) out.at(r, j) = xv.at(r, j) * iv;
    }
    return make_op(std::move(out), {x.node()}, [n, k, inv](Node& nd) {
        const Tensor& xin = nd.parents[0]->value;
        Tensor& g = nd.parents[0]->ensure_grad();
        for (int r = 0; r < n; ++r) {
            double dot = 0.0;
            for (int j = 0; j < k; ++j)
                dot += static_cast<double>(nd.grad.at(r, j)) * xin.at(r, j);
            float iv = inv[r];
            float c = static_cast<float>(dot) * iv * iv * iv / static_cast<float>(k);
            for (int j = 0; j < k; ++j) g.at(r, j) += iv * nd.grad.at(r, j) - c * xin.at(r, j);
        }
    });
}

}  // namespace genaug::nn
