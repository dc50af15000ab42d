#include "genaug/util/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace genaug::util {

using nn::Tensor;

void write_pfm(const std::string& path, const Tensor& image) {
    if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1))
        throw std::invalid_argument("write_pfm: expects [3,H,W] or [1,H,W]");
    int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_pfm: cannot open " + path);
    f << (c == 3 ? "PF" : "Pf") << "\n" << w << " " << h << "\n-1.0\n";
    // PFM stores rows bottom-to-top, pixels interleaved.
    std::vector<float> row(static_cast<size_t>(w) * c);
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                row[static_cast<size_t>(x) * c + ch] =
                    image[(static_cast<int64_t>(ch) * h + y) * w + x];
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<long>(row.size() * sizeof(float)));
    }
    if (!f) throw std::runtime_error("write_pfm: write failed " + path);
}

Tensor read_pfm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_pfm: cannot open " + path);
    std::string tag;
    int w = 0, h = 0;
    double scale = 0.0;
    f >> tag >> w >> h >> scale;
    if ((tag != "PF" && tag != "Pf") || w <= 0 || h <= 0)
        throw std::runtime_error("read_pfm: bad header in " + path);
    f.get();  // single whitespace after the scale line
    int c = tag == "PF" ? 3 : 1;
    Tensor image({c, h, w});
    std::vector<float> row(static_cast<size_t>(w) * c);
    for (int y = h - 1; y >= 0; --y) {
        f.read(reinterpret_cast<char*>(row.data()), static_cast<long>(row.size() * sizeof(float)));
        if (!f) throw std::runtime_error("read_pfm: truncated " + path);
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                image[(static_cast<int64_t>(ch) * h + y) * w + x] =
                    row[static_cast<size_t>(x) * c + ch];
    }
    return image;
}

void write_ppm(const std::string& path, const Tensor& image) {
    if (image.rank() != 3) throw std::invalid_argument("write_ppm: expects [C,H,W]");
    int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
    f << "P6\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch) {
                float v = image[(static_cast<int64_t>(std::min(ch, c - 1)) * h + y) * w + x];
                v = (v + 1.0f) * 0.5f * 255.0f;
                row[static_cast<size_t>(x) * 3 + ch] =
                    static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
            }
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<long>(row.size()));
    }
}

Tensor tile_images(const std::vector<Tensor>& images, int cols) {
    if (images.empty()) throw std::invalid_argument("tile_images: empty list");
    int c = images[0].dim(0), h = images[0].dim(1), w = images[0].dim(2);
    int rows = (static_cast<int>(images.size()) + cols - 1) / cols;
    const int pad = 2;
    int H = rows * h + (rows - 1) * pad;
    int W = cols * w + (cols - 1) * pad;
    Tensor grid = Tensor::full({c, H, W}, 1.0f);
    for (size_t i = 0; i < images.size(); ++i) {
        int r = static_cast<int>(i) / cols, col = static_cast<int>(i) % cols;
        int y0 = r * (h + pad), x0 = col * (w + pad);
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    grid[(static_cast<int64_t>(ch) * H + y0 + y) * W + x0 + x] =
                        images[i][(static_cast<int64_t>(ch) * h + y) * w + x];
    }
    return grid;
}

}  // namespace genaug::util
