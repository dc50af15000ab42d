#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "genaug/shifts/shifts.hpp"
#include "genaug/util/thread_pool.hpp"

namespace genaug::shifts {

std::string to_string(Domain d) {
    switch (d) {
        case Domain::kA: return "A";
        case Domain::kB: return "B";
        case Domain::kC: return "C";
    }
    return "C";
}

Domain domain_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Domain::kA;
    if (s == "B" || s == "b") return Domain::kB;
    if (s == "C" || s == "c") return Domain::kC;
    throw std::invalid_argument("unknown domain: " + s);
}

DomainShiftSpec default_shift_spec(Domain d) {
    DomainShiftSpec spec;
    spec.domain = d;
    spec.sigma_s = 40.0;
    spec.sigma_r = d == Domain::kB ? 0.04 : 0.2;
    return spec;
}

namespace {

constexpr double kEps = 1e-4;

// Planar [3][H*W] working buffers in [0,1].
struct Planes {
    int h, w;
    std::vector<double> c[3];
};

Planes to_unit(const Tensor& image) {
    Planes p;
    p.h = image.dim(1);
    p.w = image.dim(2);
    int64_t hw = static_cast<int64_t>(p.h) * p.w;
    for (int ch = 0; ch < 3; ++ch) {
        p.c[ch].resize(static_cast<size_t>(hw));
        for (int64_t i = 0; i < hw; ++i)
            p.c[ch][static_cast<size_t>(i)] =
                std::clamp((static_cast<double>(image[ch * hw + i]) + 1.0) * 0.5, 0.0, 1.0);
    }
    return p;
}

Tensor from_unit(const Planes& p) {
    int64_t hw = static_cast<int64_t>(p.h) * p.w;
    Tensor out({3, p.h, p.w});
    for (int ch = 0; ch < 3; ++ch)
        for (int64_t i = 0; i < hw; ++i)
            out[ch * hw + i] =
                static_cast<float>(std::clamp(p.c[ch][static_cast<size_t>(i)], 0.0, 1.0) * 2.0 - 1.0);
    return out;
}

std::vector<double> luminance(const Planes& p) {
    size_t hw = p.c[0].size();
    std::vector<double> y(hw);
    for (size_t i = 0; i < hw; ++i)
        y[i] = 0.299 * p.c[0][i] + 0.587 * p.c[1][i] + 0.114 * p.c[2][i];
    return y;
}

// Separable Gaussian with replicated borders.
std::vector<double> gaussian_blur(const std::vector<double>& src, int h, int w, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    radius = std::min(radius, std::max(h, w));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[static_cast<size_t>(i + radius)] = v;
        norm += v;
    }
    for (double& v : kernel) v /= norm;

    std::vector<double> tmp(src.size()), out(src.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, w - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * src[static_cast<size_t>(y) * w + xx];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, h - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * tmp[static_cast<size_t>(yy) * w + x];
            }
            out[static_cast<size_t>(y) * w + x] = acc;
        }
    return out;
}

// Color dodge of the luminance against its smoothed inverse: flat regions go
// white, edges stay dark.
std::vector<double> dodge_sketch(const std::vector<double>& y, int h, int w, double blur_sigma) {
    std::vector<double> inv(y.size());
    for (size_t i = 0; i < y.size(); ++i) inv[i] = 1.0 - y[i];
    std::vector<double> b = gaussian_blur(inv, h, w, blur_sigma);
    std::vector<double> out(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        double denom = std::max(kEps, 1.0 - b[i]);
        out[i] = std::clamp(y[i] / denom, 0.0, 1.0);
    }
    return out;
}

// One joint bilateral pass over all channels, range weight on RGB distance.
Planes bilateral(const Planes& in, double sigma_s, double sigma_r) {
    int h = in.h, w = in.w;
    int radius = std::min(static_cast<int>(std::ceil(2.0 * sigma_s)), std::max(h, w) / 2);
    radius = std::max(1, radius);
    double inv_ss = 1.0 / (2.0 * sigma_s * sigma_s);
    double inv_sr = 1.0 / (2.0 * sigma_r * sigma_r);
    Planes out = in;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t idx = static_cast<size_t>(y) * w + x;
            double p0 = in.c[0][idx], p1 = in.c[1][idx], p2 = in.c[2][idx];
            double acc0 = 0, acc1 = 0, acc2 = 0, norm = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                int yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    int xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    size_t j = static_cast<size_t>(yy) * w + xx;
                    double d0 = in.c[0][j] - p0, d1 = in.c[1][j] - p1, d2 = in.c[2][j] - p2;
                    double wgt = std::exp(-(dx * dx + dy * dy) * inv_ss -
                                          (d0 * d0 + d1 * d1 + d2 * d2) * inv_sr);
                    acc0 += wgt * in.c[0][j];
                    acc1 += wgt * in.c[1][j];
                    acc2 += wgt * in.c[2][j];
                    norm += wgt;
                }
            }
            out.c[0][idx] = acc0 / norm;
            out.c[1][idx] = acc1 / norm;
            out.c[2][idx] = acc2 / norm;
        }
    return out;
}

std::vector<double> sobel_magnitude(const std::vector<double>& y, int h, int w) {
    std::vector<double> out(y.size(), 0.0);
    auto at = [&](int yy, int xx) {
        return y[static_cast<size_t>(std::clamp(yy, 0, h - 1)) * w + std::clamp(xx, 0, w - 1)];
    };
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
            double gx = at(yy - 1, xx + 1) + 2 * at(yy, xx + 1) + at(yy + 1, xx + 1) -
                        at(yy - 1, xx - 1) - 2 * at(yy, xx - 1) - at(yy + 1, xx - 1);
            double gy = at(yy + 1, xx - 1) + 2 * at(yy + 1, xx) + at(yy + 1, xx + 1) -
                        at(yy - 1, xx - 1) - 2 * at(yy - 1, xx) - at(yy - 1, xx + 1);
            out[static_cast<size_t>(yy) * w + xx] = std::sqrt(gx * gx + gy * gy);
        }
    return out;
}

Tensor shift_a(const Tensor& image, const DomainShiftSpec& spec) {
    Planes p = to_unit(image);
    p = bilateral(p, spec.sigma_s, spec.sigma_r);
    p = bilateral(p, spec.sigma_s, spec.sigma_r);
    // Mild saturation boost toward the stylized look.
    for (size_t i = 0; i < p.c[0].size(); ++i) {
        double m = (p.c[0][i] + p.c[1][i] + p.c[2][i]) / 3.0;
        for (int ch = 0; ch < 3; ++ch)
            p.c[ch][i] = std::clamp(m + 1.25 * (p.c[ch][i] - m), 0.0, 1.0);
    }
    return from_unit(p);
}

Tensor shift_b(const Tensor& image, const DomainShiftSpec& spec) {
    Planes p = to_unit(image);
    p = bilateral(p, spec.sigma_s, spec.sigma_r);
    std::vector<double> y = luminance(p);
    double blur_sigma = spec.blur_sigma_fraction * p.w;
    std::vector<double> sk = dodge_sketch(y, p.h, p.w, blur_sigma);
    std::vector<double> e = sobel_magnitude(y, p.h, p.w);
    Planes out;
    out.h = p.h;
    out.w = p.w;
    for (int ch = 0; ch < 3; ++ch) out.c[ch].resize(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        double en = std::clamp(e[i] / 2.0, 0.0, 1.0);
        double v = std::clamp(0.35 * y[i] + 0.65 * sk[i], 0.0, 1.0) * (1.0 - 0.6 * en);
        v = std::pow(std::clamp(v, 0.0, 1.0), 0.8);
        out.c[0][i] = out.c[1][i] = out.c[2][i] = v;
    }
    return from_unit(out);
}

Tensor shift_c(const Tensor& image, const DomainShiftSpec& spec) {
    Planes p = to_unit(image);
    std::vector<double> y = luminance(p);
    double blur_sigma = spec.blur_sigma_fraction * p.w;
    std::vector<double> sk = dodge_sketch(y, p.h, p.w, blur_sigma);
    Planes out;
    out.h = p.h;
    out.w = p.w;
    for (int ch = 0; ch < 3; ++ch) out.c[ch] = sk;
    return from_unit(out);
}

}  // namespace

Tensor apply_shift(const Tensor& image, const DomainShiftSpec& spec) {
    if (image.rank() != 3 || image.dim(0) != 3)
        throw std::invalid_argument("apply_shift: expects [3,H,W]");
    if (spec.sigma_s <= 0.0) throw std::invalid_argument("apply_shift: sigma_s must be > 0");
    if (spec.sigma_r <= 0.0 || spec.sigma_r > 1.0)
        throw std::invalid_argument("apply_shift: sigma_r must be in (0,1]");
    switch (spec.domain) {
        case Domain::kA: return shift_a(image, spec);
        case Domain::kB: return shift_b(image, spec);
        case Domain::kC: return shift_c(image, spec);
    }
    throw std::logic_error("apply_shift: unreachable");
}

LabeledDataset apply_shift(const LabeledDataset& ds, const DomainShiftSpec& spec, int threads) {
    LabeledDataset out = ds;
    util::parallel_for(ds.size(), threads, [&](int64_t i) {
        out.images[static_cast<size_t>(i)] = apply_shift(ds.images[static_cast<size_t>(i)], spec);
    });
    return out;
}

}  // namespace genaug::shifts
