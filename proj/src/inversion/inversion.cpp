#include "genaug/inversion/inversion.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/util/csv.hpp"
#include "genaug/util/image_io.hpp"

namespace genaug::inversion {

namespace fs = std::filesystem;
using namespace genaug::nn;

namespace {

Var reconstruction_loss(const GeneratorModel& gen, const DiscriminatorModel& disc, const Var& code,
                        const Tensor& target_batch, const std::vector<Tensor>& target_feats,
                        double feature_weight) {
    std::vector<Var> styles;
    for (int l = 0; l < gen.layers(); ++l) styles.push_back(slice_row(code, l));
    GeneratorModel::Forward f = gen.forward(styles);
    Var loss = mse(f.image, constant(target_batch));
    std::vector<Var> feats = disc.features(f.image);
    for (size_t l = 0; l < feats.size(); ++l) {
        Var diff = reduce_mean(abs_val(sub(feats[l], constant(target_feats[l]))));
        loss = add(loss, scale(diff, static_cast<float>(feature_weight)));
    }
    return loss;
}

}  // namespace

InversionResult invert(const GeneratorModel& gen, const DiscriminatorModel& disc,
                       const Tensor& target_image, const InversionConfig& cfg) {
    int s = gen.image_size();
    if (target_image.rank() != 3 || target_image.dim(0) != 3 || target_image.dim(1) != s ||
        target_image.dim(2) != s)
        throw std::invalid_argument("invert: target image shape does not match generator");
    if (cfg.steps < 0) throw std::invalid_argument("invert: steps must be >= 0");

    // Model weights are fixed during inversion; frozen clones keep the
    // backward pass focused on the code.
    GeneratorModel gen_frozen = gen.clone();
    gen_frozen.mapping_store().set_requires_grad(false);
    gen_frozen.synthesis_store().set_requires_grad(false);
    DiscriminatorModel disc_frozen = disc.clone();
    disc_frozen.store().set_requires_grad(false);

    int L = gen.layers(), D = gen.style_dim();
    Tensor mean = stylegen::mean_style(gen_frozen, cfg.mean_style_draws, cfg.rng_seed);
    Tensor init({L, D});
    for (int l = 0; l < L; ++l)
        for (int d = 0; d < D; ++d) init.at(l, d) = mean[d];

    Var code = parameter(init);
    Adam opt({code}, cfg.lr);

    Tensor target_batch = target_image.reshaped({1, 3, s, s});
    std::vector<Tensor> target_feats;
    {
        std::vector<Var> fv = disc_frozen.features(constant(target_batch));
        for (const Var& f : fv) target_feats.push_back(f.value());
    }

    InversionResult result;
    double best = std::numeric_limits<double>::infinity();
    Tensor best_code = init;
    for (int step = 0; step <= cfg.steps; ++step) {
        Var loss = reconstruction_loss(gen_frozen, disc_frozen, code, target_batch, target_feats,
                                       cfg.feature_weight);
        double lv = loss.scalar();
        if (!std::isfinite(lv))
            throw std::runtime_error("invert: non-finite loss at step " + std::to_string(step));
        result.loss_trace.push_back(lv);
        if (lv < best) {
            best = lv;
            best_code = code.value();
        }
        if (step == cfg.steps) break;
        opt.zero_grad();
        backward(loss);
        opt.step();
    }

    result.code = StyleCode{best_code};
    result.reconstruction = stylegen::synthesize(gen, result.code).image;
    return result;
}

void save_inversion(const InversionResult& result, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream code(dir + "/code.txt");
    if (!code) throw std::runtime_error("save_inversion: cannot write " + dir);
    code.precision(9);
    for (int l = 0; l < result.code.layers(); ++l) {
        for (int d = 0; d < result.code.dim(); ++d) {
            if (d) code << ' ';
            code << result.code.rows.at(l, d);
        }
        code << '\n';
    }
    util::write_pfm(dir + "/reconstruction.pfm", result.reconstruction);
    util::CsvWriter trace({"step", "loss"});
    for (size_t i = 0; i < result.loss_trace.size(); ++i)
        trace.add_row({std::to_string(i), util::format_double(result.loss_trace[i], 9)});
    trace.save(dir + "/loss_trace.csv");
}

InversionResult load_inversion(const std::string& dir) {
    InversionResult result;
    std::ifstream code(dir + "/code.txt");
    if (!code) throw std::runtime_error("load_inversion: cannot open " + dir + "/code.txt");
    std::vector<std::vector<float>> rows;
    std::string line;
    while (std::getline(code, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<float> row;
        float v;
        while (ss >> v) row.push_back(v);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("load_inversion: empty code matrix");
    int L = static_cast<int>(rows.size()), D = static_cast<int>(rows[0].size());
    Tensor m({L, D});
    for (int l = 0; l < L; ++l) {
        if (static_cast<int>(rows[static_cast<size_t>(l)].size()) != D)
            throw std::runtime_error("load_inversion: ragged code matrix");
        for (int d = 0; d < D; ++d) m.at(l, d) = rows[static_cast<size_t>(l)][static_cast<size_t>(d)];
    }
    result.code = StyleCode{std::move(m)};
    result.reconstruction = util::read_pfm(dir + "/reconstruction.pfm");
    util::CsvTable trace = util::read_csv(dir + "/loss_trace.csv");
    for (const auto& row : trace.rows) result.loss_trace.push_back(std::stod(row[1]));
    return result;
}

}  // namespace genaug::inversion
