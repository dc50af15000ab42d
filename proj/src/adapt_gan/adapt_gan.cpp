#include "genaug/adapt_gan/adapt_gan.hpp"

#include <cmath>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/stylegen/checkpoint.hpp"
#include "genaug/util/csv.hpp"

namespace genaug::adapt_gan {

using namespace genaug::nn;

std::string to_string(LossNorm n) { return n == LossNorm::kL1 ? "l1" : "l2"; }

LossNorm loss_norm_from_string(const std::string& s) {
    if (s == "l1" || s == "L1") return LossNorm::kL1;
    if (s == "l2" || s == "L2") return LossNorm::kL2;
    throw std::invalid_argument("unknown loss norm: " + s);
}

int default_mix_start(int layers) {
    return std::max(2, static_cast<int>(std::lround(layers * 8.0 / 18.0)));
}

StyleCode style_mix(const StyleCode& code, const Tensor& r, int mix_start) {
    int L = code.layers(), D = code.dim();
    if (r.size() != D) throw std::invalid_argument("style_mix: row dimension mismatch");
    if (mix_start < 1 || mix_start > L + 1)
        throw std::invalid_argument("style_mix: mix_start outside [1, L+1]");
    StyleCode out{code.rows};
    for (int l = mix_start; l <= L; ++l)
        for (int d = 0; d < D; ++d) out.rows.at(l - 1, d) = r[d];
    return out;
}

Var feature_match_loss_graph(const DiscriminatorModel& disc, const Var& x_hat, const Tensor& x_t,
                             LossNorm norm) {
    int s = disc.config().image_size;
    Tensor t_batch = x_t.reshaped({1, 3, s, s});
    std::vector<Var> f_hat = disc.features(x_hat);
    std::vector<Var> f_t = disc.features(constant(t_batch));
    Var loss;
    for (size_t l = 0; l < f_hat.size(); ++l) {
        Var term = norm == LossNorm::kL1 ? l1_sum(f_hat[l], stop_gradient(f_t[l]))
                                         : l2_norm(f_hat[l], stop_gradient(f_t[l]));
        loss = l == 0 ? term : add(loss, term);
    }
    return loss;
}

double feature_match_loss(const DiscriminatorModel& disc, const Tensor& x_hat, const Tensor& x_t,
                          LossNorm norm) {
    if (!x_hat.same_shape(x_t)) throw std::invalid_argument("feature_match_loss: shape mismatch");
    int s = disc.config().image_size;
    Var hat = constant(x_hat.reshaped({1, 3, s, s}));
    return static_cast<double>(feature_match_loss_graph(disc, hat, x_t, norm).scalar());
}

GeneratorModel finetune_single_shot(const GeneratorModel& gen_s, const DiscriminatorModel& disc_s,
                                    const Tensor& x_t, const inversion::InversionResult& inv,
                                    const FinetuneConfig& cfg, std::vector<double>* loss_log) {
    int L = gen_s.layers();
    if (inv.code.layers() != L || inv.code.dim() != gen_s.style_dim())
        throw std::invalid_argument("finetune_single_shot: inverted code does not match generator");
    int mix_start = cfg.mix_start == 0 ? default_mix_start(L) : cfg.mix_start;
    if (mix_start < 1 || mix_start > L + 1)
        throw std::invalid_argument("finetune_single_shot: mix_start outside [1, L+1]");

    GeneratorModel gen_t = gen_s.clone();
    gen_t.mapping_store().set_requires_grad(false);  // only synthesis parameters move
    DiscriminatorModel disc = disc_s.clone();
    disc.store().set_requires_grad(false);

    Adam opt(gen_t.synthesis_params(), cfg.lr);
    Rng rng(cfg.rng_seed);
    std::vector<double> losses;

    auto snapshot = [&gen_t]() {
        nn::ParamArchive a;
        gen_t.synthesis_store().save_into(a);
        return a;
    };
    nn::ParamArchive last_arch = snapshot();

    for (int it = 0; it < cfg.iterations; ++it) {
        Tensor z = randn_tensor({1, gen_s.config().latent_dim}, rng);
        Tensor r = gen_t.map_latent(constant(z)).value().reshaped({gen_s.style_dim()});
        StyleCode mixed = style_mix(inv.code, r, mix_start);

        std::vector<Var> styles;
        for (int l = 0; l < L; ++l) {
            Tensor row({1, gen_s.style_dim()});
            for (int d = 0; d < gen_s.style_dim(); ++d) row.at(0, d) = mixed.rows.at(l, d);
            styles.push_back(constant(std::move(row)));
        }
        GeneratorModel::Forward f = gen_t.forward(styles);
        Var loss = feature_match_loss_graph(disc, f.image, x_t, cfg.norm);

        double lv = loss.scalar();
        if (!std::isfinite(lv)) {
            gen_t.synthesis_store().load_from(last_arch);
            if (!cfg.abort_checkpoint_dir.empty())
                stylegen::save_generator(gen_t, cfg.abort_checkpoint_dir,
                                         {{"aborted_at_iteration", std::to_string(it)}});
            throw std::runtime_error("finetune_single_shot: non-finite loss at iteration " +
                                     std::to_string(it) + "; last good state " +
                                     (cfg.abort_checkpoint_dir.empty() ? "kept in memory"
                                                                       : cfg.abort_checkpoint_dir));
        }
        losses.push_back(lv);
        last_arch = snapshot();

        opt.zero_grad();
        backward(loss);
        opt.step();
    }

    if (!cfg.loss_log_path.empty()) {
        util::CsvWriter csv({"iteration", "loss"});
        for (size_t i = 0; i < losses.size(); ++i)
            csv.add_row({std::to_string(i), util::format_double(losses[i], 9)});
        csv.save(cfg.loss_log_path);
    }
    if (loss_log) *loss_log = std::move(losses);
    gen_t.mapping_store().set_requires_grad(true);
    return gen_t;
}

}  // namespace genaug::adapt_gan
