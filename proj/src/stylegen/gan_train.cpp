#include "genaug/stylegen/gan_train.hpp"

#include <cmath>
#include <stdexcept>

#include "genaug/nn/optim.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/util/csv.hpp"

namespace genaug::stylegen {

using namespace genaug::nn;

GanTrainResult train_source_gan(const std::vector<Tensor>& images, const GanTrainConfig& cfg) {
    if (images.empty()) throw std::invalid_argument("train_source_gan: empty dataset");
    int s = cfg.gen.image_size;
    for (const Tensor& im : images)
        if (im.rank() != 3 || im.dim(0) != 3 || im.dim(1) != s || im.dim(2) != s)
            throw std::invalid_argument("train_source_gan: image size does not match config");
    if (cfg.disc.image_size != s)
        throw std::invalid_argument("train_source_gan: generator/discriminator size mismatch");

    GanTrainResult result{GeneratorModel(cfg.gen), DiscriminatorModel(cfg.disc), {}};
    GeneratorModel& gen = result.gen;
    DiscriminatorModel& disc = result.disc;

    Adam opt_g(gen.all_params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2);
    Adam opt_d(disc.params(), cfg.lr, cfg.adam_beta1, cfg.adam_beta2);

    Rng rng(cfg.seed);
    const int b = cfg.batch_size;
    const int n_img = static_cast<int>(images.size());

    auto zero_all = [&]() {
        opt_g.zero_grad();
        opt_d.zero_grad();
    };

    for (int step = 0; step < cfg.steps; ++step) {
        Tensor real({b, 3, s, s});
        for (int i = 0; i < b; ++i) {
            const Tensor& im = images[static_cast<size_t>(rng.uniform_int(0, n_img - 1))];
            std::copy(im.data(), im.data() + im.size(), real.data() + static_cast<int64_t>(i) * im.size());
        }
        Tensor z = randn_tensor({b, cfg.gen.latent_dim}, rng);

        Var w = gen.map_latent(constant(z));
        std::vector<Var> styles(static_cast<size_t>(gen.layers()), w);
        GeneratorModel::Forward fake = gen.forward(styles);

        // Discriminator step (generator output detached).
        Var d_real = disc.logits(constant(real));
        Var d_fake = disc.logits(stop_gradient(fake.image));
        Var loss_d = add(reduce_mean(softplus(neg(d_real))), reduce_mean(softplus(d_fake)));
        zero_all();
        backward(loss_d);
        opt_d.step();

        // Generator step against the updated discriminator.
        Var d_fake2 = disc.logits(fake.image);
        Var loss_g = reduce_mean(softplus(neg(d_fake2)));
        zero_all();
        backward(loss_g);
        opt_g.step();

        double ld = loss_d.scalar(), lg = loss_g.scalar();
        if (!std::isfinite(ld) || !std::isfinite(lg))
            throw std::runtime_error("train_source_gan: non-finite loss at step " +
                                     std::to_string(step) + " (d=" + std::to_string(ld) +
                                     ", g=" + std::to_string(lg) + ")");
        if (cfg.log_every > 0 && (step % cfg.log_every == 0 || step + 1 == cfg.steps)) {
            result.log.push_back({static_cast<double>(step), ld, lg,
                                  static_cast<double>(fake.image.value().min_value()),
                                  static_cast<double>(fake.image.value().max_value())});
        }
    }

    if (!cfg.log_path.empty()) {
        util::CsvWriter csv({"step", "d_loss", "g_loss", "fake_min", "fake_max"});
        for (const auto& row : result.log)
            csv.add_row({util::format_double(row[0], 0), util::format_double(row[1]),
                         util::format_double(row[2]), util::format_double(row[3]),
                         util::format_double(row[4])});
        csv.save(cfg.log_path);
    }
    return result;
}

}  // namespace genaug::stylegen
