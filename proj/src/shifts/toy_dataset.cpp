#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "genaug/nn/rng.hpp"
#include "genaug/shifts/shifts.hpp"
#include "genaug/util/csv.hpp"
#include "genaug/util/image_io.hpp"

namespace genaug::shifts {

namespace fs = std::filesystem;
using nn::Rng;

int LabeledDataset::attribute_index(const std::string& name) const {
    for (size_t i = 0; i < attribute_names.size(); ++i)
        if (attribute_names[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("dataset has no attribute '" + name + "'");
}

LabeledDataset LabeledDataset::subset(SplitTag tag) const {
    LabeledDataset out;
    out.attribute_names = attribute_names;
    for (size_t i = 0; i < images.size(); ++i) {
        if (split[i] != tag) continue;
        out.images.push_back(images[i]);
        out.labels.push_back(labels[i]);
        out.split.push_back(tag);
    }
    return out;
}

const std::vector<std::string>& supported_attributes() {
    static const std::vector<std::string> names = {"square", "large", "striped", "outlined"};
    return names;
}

namespace {

struct Rgb {
    double r, g, b;
};

Rgb hsv(double h, double s, double v) {
    double c = v * s;
    double hp = h * 6.0;
    double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double m = v - c;
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    return {r + m, g + m, b + m};
}

struct SceneParams {
    bool square, large, striped, outlined;
    Rgb bg0, bg1, obj;
    double grad_angle;
    double tex_amp, tex_freq, tex_angle, tex_phase;
    double cx, cy, radius;
    double stripe_phase;
};

SceneParams draw_scene(Rng& rng) {
    SceneParams p;
    p.square = rng.bernoulli(0.5);
    p.large = rng.bernoulli(0.5);
    p.striped = rng.bernoulli(0.5);
    p.outlined = rng.bernoulli(0.5);
    p.bg0 = hsv(rng.uniform(), rng.uniform(0.15, 0.45), rng.uniform(0.35, 0.75));
    p.bg1 = hsv(rng.uniform(), rng.uniform(0.15, 0.45), rng.uniform(0.35, 0.75));
    p.obj = hsv(rng.uniform(), rng.uniform(0.6, 0.95), rng.uniform(0.55, 0.95));
    p.grad_angle = rng.uniform(0.0, 6.283185307179586);
    p.tex_amp = rng.uniform(0.02, 0.06);
    p.tex_freq = rng.uniform(2.0, 4.0);
    p.tex_angle = rng.uniform(0.0, 6.283185307179586);
    p.tex_phase = rng.uniform(0.0, 6.283185307179586);
    p.cx = 16.0 + rng.uniform(-3.0, 3.0);
    p.cy = 16.0 + rng.uniform(-3.0, 3.0);
    p.radius = p.large ? rng.uniform(9.0, 11.0) : rng.uniform(5.0, 6.5);
    p.stripe_phase = rng.uniform(0.0, 6.283185307179586);
    return p;
}

// Coverage of a signed distance with ~0.75px soft edge.
double soft_edge(double d, double width = 0.75) {
    return std::clamp(0.5 - d / width, 0.0, 1.0);
}

Rgb shade(const SceneParams& p, double x, double y, int s) {
    // x, y in pixel units of the s x s target grid.
    double gx = std::cos(p.grad_angle), gy = std::sin(p.grad_angle);
    double t = ((x - s / 2.0) * gx + (y - s / 2.0) * gy) / static_cast<double>(s) + 0.5;
    double tex = p.tex_amp *
                 std::sin(6.283185307179586 * p.tex_freq *
                              (x * std::cos(p.tex_angle) + y * std::sin(p.tex_angle)) / s +
                          p.tex_phase);
    t = std::clamp(t + tex, 0.0, 1.0);
    Rgb col{p.bg0.r + t * (p.bg1.r - p.bg0.r), p.bg0.g + t * (p.bg1.g - p.bg0.g),
            p.bg0.b + t * (p.bg1.b - p.bg0.b)};

    double dx = x - p.cx, dy = y - p.cy;
    double d = p.square ? std::max(std::fabs(dx), std::fabs(dy)) - p.radius
                        : std::sqrt(dx * dx + dy * dy) - p.radius;
    double alpha = soft_edge(d);
    if (alpha > 0.0) {
        Rgb oc = p.obj;
        if (p.striped) {
            double wave = 0.5 + 0.5 * std::sin(6.283185307179586 * (x + y) / 5.65685424949238 +
                                               p.stripe_phase);
            double f = 1.0 - 0.45 * wave;
            oc = {oc.r * f, oc.g * f, oc.b * f};
        }
        col = {col.r + alpha * (oc.r - col.r), col.g + alpha * (oc.g - col.g),
               col.b + alpha * (oc.b - col.b)};
    }
    if (p.outlined) {
        double ring = soft_edge(std::fabs(d) - 0.9);
        if (ring > 0.0) {
            Rgb rc{p.obj.r * 0.2, p.obj.g * 0.2, p.obj.b * 0.2};
            col = {col.r + ring * (rc.r - col.r), col.g + ring * (rc.g - col.g),
                   col.b + ring * (rc.b - col.b)};
        }
    }
    return col;
}

Tensor render_scene(const SceneParams& p, int s) {
    constexpr int kSuper = 3;
    Tensor img({3, s, s});
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            Rgb acc{0, 0, 0};
            for (int sy = 0; sy < kSuper; ++sy)
                for (int sx = 0; sx < kSuper; ++sx) {
                    Rgb c = shade(p, x + (sx + 0.5) / kSuper, y + (sy + 0.5) / kSuper, s);
                    acc.r += c.r;
                    acc.g += c.g;
                    acc.b += c.b;
                }
            double inv = 1.0 / (kSuper * kSuper);
            img[(static_cast<int64_t>(0) * s + y) * s + x] =
                static_cast<float>(std::clamp(acc.r * inv, 0.0, 1.0) * 2.0 - 1.0);
            img[(static_cast<int64_t>(1) * s + y) * s + x] =
                static_cast<float>(std::clamp(acc.g * inv, 0.0, 1.0) * 2.0 - 1.0);
            img[(static_cast<int64_t>(2) * s + y) * s + x] =
                static_cast<float>(std::clamp(acc.b * inv, 0.0, 1.0) * 2.0 - 1.0);
        }
    return img;
}

}  // namespace

LabeledDataset make_toy_dataset(int n, uint64_t seed, const std::vector<std::string>& schema,
                                int image_size, double source_fraction) {
    if (n < 1) throw std::invalid_argument("make_toy_dataset: n must be >= 1");
    if (schema.empty()) throw std::invalid_argument("make_toy_dataset: empty attribute schema");
    const auto& known = supported_attributes();
    for (const std::string& a : schema) {
        if (std::find(known.begin(), known.end(), a) == known.end())
            throw std::invalid_argument("make_toy_dataset: unsupported attribute '" + a + "'");
        if (std::count(schema.begin(), schema.end(), a) != 1)
            throw std::invalid_argument("make_toy_dataset: duplicate attribute '" + a + "'");
    }

    LabeledDataset ds;
    ds.attribute_names = schema;
    int n_source = static_cast<int>(std::lround(source_fraction * n));
    for (int i = 0; i < n; ++i) {
        Rng rng(Rng::derive(seed, static_cast<uint64_t>(i)));
        SceneParams p = draw_scene(rng);
        ds.images.push_back(render_scene(p, image_size));
        std::vector<int> row(schema.size(), 0);
        for (size_t a = 0; a < schema.size(); ++a) {
            if (schema[a] == "square") row[a] = p.square ? 1 : 0;
            else if (schema[a] == "large") row[a] = p.large ? 1 : 0;
            else if (schema[a] == "striped") row[a] = p.striped ? 1 : 0;
            else row[a] = p.outlined ? 1 : 0;
        }
        ds.labels.push_back(std::move(row));
        ds.split.push_back(i < n_source ? SplitTag::kSource : SplitTag::kTarget);
    }
    return ds;
}

void save_labeled_dataset(const LabeledDataset& ds, const std::string& dir,
                          const std::string& domain_tag) {
    fs::create_directories(dir);
    std::vector<std::string> header = {"filename"};
    for (const auto& a : ds.attribute_names) header.push_back(a);
    header.push_back("split");
    header.push_back("domain");
    util::CsvWriter csv(header);
    for (size_t i = 0; i < ds.images.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "%06zu.pfm", i);
        util::write_pfm(dir + "/" + name, ds.images[i]);
        std::vector<std::string> row = {name};
        for (int v : ds.labels[i]) row.push_back(std::to_string(v));
        row.push_back(ds.split[i] == SplitTag::kSource ? "source" : "target");
        row.push_back(domain_tag);
        csv.add_row(std::move(row));
    }
    csv.save(dir + "/labels.csv");
}

LabeledDataset load_labeled_dataset(const std::string& dir) {
    util::CsvTable t = util::read_csv(dir + "/labels.csv");
    if (t.header.size() < 3) throw std::runtime_error("labels.csv: malformed header");
    LabeledDataset ds;
    for (size_t i = 1; i + 2 < t.header.size(); ++i) ds.attribute_names.push_back(t.header[i]);
    for (const auto& row : t.rows) {
        ds.images.push_back(util::read_pfm(dir + "/" + row[0]));
        std::vector<int> labels;
        for (size_t i = 1; i + 2 < row.size(); ++i) labels.push_back(std::stoi(row[i]));
        ds.labels.push_back(std::move(labels));
        ds.split.push_back(row[row.size() - 2] == "source" ? SplitTag::kSource : SplitTag::kTarget);
    }
    return ds;
}

}  // namespace genaug::shifts
