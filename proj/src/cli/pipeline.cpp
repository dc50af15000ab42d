#include "genaug/cli/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "genaug/adapt_gan/adapt_gan.hpp"
#include "genaug/inversion/inversion.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/stylegen/gan_train.hpp"
#include "genaug/util/csv.hpp"
#include "genaug/util/hash.hpp"
#include "genaug/util/image_io.hpp"
#include "genaug/util/thread_pool.hpp"

namespace genaug::cli {

namespace fs = std::filesystem;
using nn::Rng;

namespace {

std::mutex g_stage_mutex;
std::map<std::string, std::unique_ptr<std::mutex>> g_key_mutexes;

std::mutex& key_mutex(const std::string& key) {
    std::lock_guard<std::mutex> lock(g_stage_mutex);
    auto& slot = g_key_mutexes[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

void make_alias(const fs::path& stage_dir, const std::string& alias, const std::string& key) {
    fs::path link_dir = stage_dir / "by-name";
    fs::create_directories(link_dir);
    fs::path link = link_dir / alias;
    std::error_code ec;
    fs::remove(link, ec);
    fs::create_directory_symlink(fs::path("..") / key, link, ec);
    // Alias creation is best effort; some filesystems refuse symlinks.
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    threads_ = resolve_threads(cfg_);
}

std::string Pipeline::run_stage(const std::string& stage, const std::string& alias,
                                const std::string& key_material, const StageFn& build) {
    std::string key = util::hash_hex(util::fnv1a_str(stage + "\n" + key_material));
    fs::path stage_dir = fs::path(cfg_.artifact_root) / stage;
    fs::path dir = stage_dir / key;
    std::lock_guard<std::mutex> lock(key_mutex(dir.string()));
    if (fs::exists(dir / ".done")) return dir.string();
    try {
        std::error_code ec;
        fs::remove_all(dir, ec);  // discard partial output
        fs::create_directories(dir);
        build(dir.string());
        std::ofstream marker(dir / ".done");
        marker << key_material;
        make_alias(stage_dir, alias, key);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage + "/" + alias, e.what());
    }
    return dir.string();
}

std::string Pipeline::dataset_key_material() const {
    std::ostringstream os;
    os << "n=" << cfg_.data.n << "|seed=" << cfg_.data.seed << "|size=" << cfg_.data.image_size
       << "|frac=" << cfg_.data.source_fraction;
    return os.str();
}

std::string Pipeline::ensure_dataset() {
    return run_stage("dataset", "toy", dataset_key_material(), [&](const std::string& dir) {
        shifts::LabeledDataset ds =
            shifts::make_toy_dataset(cfg_.data.n, cfg_.data.seed, shifts::supported_attributes(),
                                     cfg_.data.image_size, cfg_.data.source_fraction);
        shifts::save_labeled_dataset(ds, dir, "none");
    });
}

shifts::DomainShiftSpec Pipeline::shift_spec(const std::string& domain) const {
    shifts::DomainShiftSpec spec;
    spec.domain = shifts::domain_from_string(domain);
    spec.sigma_s = cfg_.shift.sigma_s;
    spec.sigma_r = spec.domain == shifts::Domain::kA   ? cfg_.shift.sigma_r_a
                   : spec.domain == shifts::Domain::kB ? cfg_.shift.sigma_r_b
                                                       : cfg_.shift.sigma_r_c;
    spec.blur_sigma_fraction = cfg_.shift.blur_sigma_fraction;
    return spec;
}

std::string Pipeline::ensure_shifted(const std::string& domain) {
    shifts::DomainShiftSpec spec = shift_spec(domain);
    std::ostringstream key;
    key << dataset_key_material() << "|domain=" << domain << "|sigma_s=" << spec.sigma_s
        << "|sigma_r=" << spec.sigma_r << "|blur=" << spec.blur_sigma_fraction;
    return run_stage("shifted", domain, key.str(), [&](const std::string& dir) {
        const shifts::LabeledDataset& base = dataset();
        shifts::LabeledDataset target = base.subset(shifts::SplitTag::kTarget);
        shifts::LabeledDataset shifted = shifts::apply_shift(target, spec, threads_);
        shifts::save_labeled_dataset(shifted, dir, domain);
        nn::Manifest side;
        side["domain"] = domain;
        side["sigma_s"] = util::format_double(spec.sigma_s, 6);
        side["sigma_r"] = util::format_double(spec.sigma_r, 6);
        side["blur_sigma_fraction"] = util::format_double(spec.blur_sigma_fraction, 6);
        nn::save_manifest(side, dir + "/shift_spec.txt");
    });
}

std::string Pipeline::ensure_gan() {
    std::ostringstream key;
    key << dataset_key_material() << "|gan:latent=" << cfg_.gan.latent_dim
        << "|style=" << cfg_.gan.style_dim << "|layers=" << cfg_.gan.layers
        << "|ch=" << cfg_.gan.base_channels << "|dch=" << cfg_.gan.disc_channels
        << "|steps=" << cfg_.gan.steps << "|batch=" << cfg_.gan.batch_size << "|lr=" << cfg_.gan.lr
        << "|seed=" << cfg_.gan.seed;
    return run_stage("gan", "source", key.str(), [&](const std::string& dir) {
        stylegen::GanTrainConfig tc;
        tc.gen.latent_dim = cfg_.gan.latent_dim;
        tc.gen.style_dim = cfg_.gan.style_dim;
        tc.gen.layers = cfg_.gan.layers;
        tc.gen.image_size = cfg_.data.image_size;
        tc.gen.base_channels = cfg_.gan.base_channels;
        tc.gen.init_seed = Rng::derive(cfg_.gan.seed, 1);
        tc.disc.image_size = cfg_.data.image_size;
        tc.disc.base_channels = cfg_.gan.disc_channels;
        tc.disc.init_seed = Rng::derive(cfg_.gan.seed, 2);
        tc.steps = cfg_.gan.steps;
        tc.batch_size = cfg_.gan.batch_size;
        tc.lr = cfg_.gan.lr;
        tc.seed = cfg_.gan.seed;
        tc.log_path = dir + "/train_log.csv";
        shifts::LabeledDataset source = dataset().subset(shifts::SplitTag::kSource);
        stylegen::GanTrainResult result = stylegen::train_source_gan(source.images, tc);
        nn::Manifest extra{{"seed", std::to_string(cfg_.gan.seed)},
                           {"steps", std::to_string(cfg_.gan.steps)}};
        stylegen::save_generator(result.gen, dir + "/gen", extra);
        stylegen::save_discriminator(result.disc, dir + "/disc", extra);
    });
}

std::string Pipeline::ensure_classifier(const std::string& attribute, uint64_t seed) {
    std::ostringstream key;
    key << dataset_key_material() << "|clf:attr=" << attribute << "|seed=" << seed
        << "|epochs=" << cfg_.classifier.epochs << "|lr=" << cfg_.classifier.lr
        << "|batch=" << cfg_.classifier.batch_size << "|ch=" << cfg_.classifier.base_channels
        << "|feat=" << cfg_.classifier.feature_dim;
    std::string alias = attribute + "-s" + std::to_string(seed);
    return run_stage("classifier", alias, key.str(), [&](const std::string& dir) {
        sfda::TrainClassifierConfig tc;
        tc.epochs = cfg_.classifier.epochs;
        tc.lr = cfg_.classifier.lr;
        tc.batch_size = cfg_.classifier.batch_size;
        tc.seed = Rng::derive(seed, util::fnv1a_str("clf|" + attribute));
        tc.model.image_size = cfg_.data.image_size;
        tc.model.base_channels = cfg_.classifier.base_channels;
        tc.model.feature_dim = cfg_.classifier.feature_dim;
        shifts::LabeledDataset source = dataset().subset(shifts::SplitTag::kSource);
        double val_acc = 0.0;
        sfda::ClassifierModel model = sfda::train_source_classifier(source, attribute, tc, &val_acc);
        sfda::save_classifier(model, dir + "/model",
                              {{"attribute", attribute},
                               {"experiment_seed", std::to_string(seed)},
                               {"val_accuracy", util::format_double(val_acc, 4)}});
    });
}

int Pipeline::target_image_index(const std::string& domain, uint64_t seed) const {
    int n_source = static_cast<int>(std::lround(cfg_.data.source_fraction * cfg_.data.n));
    int n_target = cfg_.data.n - n_source;
    Rng rng(Rng::derive(seed, util::fnv1a_str("target|" + domain)));
    return rng.uniform_int(0, n_target - 1);
}

std::string Pipeline::ensure_finetuned(const std::string& domain, uint64_t seed) {
    std::string gan_dir = ensure_gan();
    std::string shifted_dir = ensure_shifted(domain);
    std::ostringstream key;
    key << util::hash_hex(util::fnv1a_str(gan_dir)) << "|"
        << util::hash_hex(util::fnv1a_str(shifted_dir)) << "|seed=" << seed
        << "|inv:steps=" << cfg_.inversion.steps << ",lr=" << cfg_.inversion.lr
        << ",fw=" << cfg_.inversion.feature_weight << ",draws=" << cfg_.inversion.mean_style_draws
        << "|ft:N=" << cfg_.finetune.iterations << ",lr=" << cfg_.finetune.lr
        << ",mix=" << cfg_.finetune.mix_start << ",norm=" << cfg_.finetune.norm;
    std::string alias = domain + "-s" + std::to_string(seed);
    return run_stage("finetune", alias, key.str(), [&](const std::string& dir) {
        const shifts::LabeledDataset& shifted = shifted_target(domain);
        int idx = target_image_index(domain, seed);
        const nn::Tensor& x_t = shifted.images[static_cast<size_t>(idx)];
        util::write_pfm(dir + "/target.pfm", x_t);
        util::write_ppm(dir + "/target.ppm", x_t);

        inversion::InversionConfig ic;
        ic.steps = cfg_.inversion.steps;
        ic.lr = cfg_.inversion.lr;
        ic.feature_weight = cfg_.inversion.feature_weight;
        ic.mean_style_draws = cfg_.inversion.mean_style_draws;
        ic.rng_seed = Rng::derive(seed, util::fnv1a_str("invert|" + domain));
        inversion::InversionResult inv =
            inversion::invert(source_generator(), source_discriminator(), x_t, ic);
        inversion::save_inversion(inv, dir + "/inversion");

        adapt_gan::FinetuneConfig fc;
        fc.iterations = cfg_.finetune.iterations;
        fc.lr = cfg_.finetune.lr;
        fc.mix_start = cfg_.finetune.mix_start;
        fc.norm = adapt_gan::loss_norm_from_string(cfg_.finetune.norm);
        fc.rng_seed = Rng::derive(seed, util::fnv1a_str("finetune|" + domain));
        fc.loss_log_path = dir + "/finetune_loss.csv";
        fc.abort_checkpoint_dir = dir + "/aborted";
        stylegen::GeneratorModel gen_t = adapt_gan::finetune_single_shot(
            source_generator(), source_discriminator(), x_t, inv, fc);

        nn::Manifest extra;
        extra["derived_from"] = stylegen::checkpoint_hash(gan_dir + "/gen");
        extra["domain"] = domain;
        extra["experiment_seed"] = std::to_string(seed);
        extra["target_index"] = std::to_string(idx);
        stylegen::save_generator(gen_t, dir + "/gen_t", extra);
        nn::save_manifest({{"target_index", std::to_string(idx)}, {"domain", domain}},
                          dir + "/meta.txt");
    });
}

augsample::PruneStrategy Pipeline::method_strategy(const std::string& method) {
    if (method == "synth-base") return augsample::PruneStrategy::kBase;
    if (method == "synth-prune-zero") return augsample::PruneStrategy::kPruneZero;
    if (method == "synth-prune-rewind") return augsample::PruneStrategy::kPruneRewind;
    throw std::invalid_argument("method has no sampling strategy: " + method);
}

bool Pipeline::is_synth_method(const std::string& method) {
    return method.rfind("synth-", 0) == 0;
}

augsample::PruneConfig Pipeline::prune_config(const std::string& method, const std::string& domain,
                                              uint64_t seed) const {
    augsample::PruneConfig pc;
    pc.strategy = method_strategy(method);
    pc.p = pc.strategy == augsample::PruneStrategy::kPruneRewind ? cfg_.curate.prune_rewind_p
                                                                 : cfg_.curate.prune_zero_p;
    pc.prune_start = cfg_.curate.prune_start == 0 ? adapt_gan::default_mix_start(cfg_.gan.layers)
                                                  : cfg_.curate.prune_start;
    pc.gate_probability = cfg_.curate.gate_probability;
    pc.truncation_psi = cfg_.curate.truncation_psi;
    pc.rng_seed = Rng::derive(seed, util::fnv1a_str("curate|" + domain + "|" + method));
    return pc;
}

std::string Pipeline::ensure_curated(const std::string& domain, uint64_t seed,
                                     const std::string& method) {
    std::string ft_dir = ensure_finetuned(domain, seed);
    augsample::PruneConfig pc = prune_config(method, domain, seed);
    std::ostringstream key;
    key << util::hash_hex(util::fnv1a_str(ft_dir)) << "|curate:" << to_string(pc.strategy)
        << "|p=" << pc.p << "|start=" << pc.prune_start << "|gate=" << pc.gate_probability
        << "|psi=" << pc.truncation_psi << "|m=" << cfg_.curate.samples << "|seed=" << pc.rng_seed;
    std::string alias = domain + "-s" + std::to_string(seed) + "-" + to_string(pc.strategy);
    return run_stage("curate", alias, key.str(), [&](const std::string& dir) {
        const stylegen::GeneratorModel& gen_t = finetuned_generator(domain, seed);
        augsample::SyntheticDataset ds =
            augsample::curate_dataset(gen_t, source_generator(), pc, cfg_.curate.samples, threads_);
        std::string gan_dir = ensure_gan();
        augsample::save_dataset(ds, dir + "/data", stylegen::checkpoint_hash(ft_dir + "/gen_t"),
                                stylegen::checkpoint_hash(gan_dir + "/gen"));
    });
}

ResultRow Pipeline::ensure_cell(const std::string& domain, const std::string& attribute,
                                uint64_t seed, const std::string& method) {
    std::string clf_dir = ensure_classifier(attribute, seed);
    std::string shifted_dir = ensure_shifted(domain);
    std::ostringstream key;
    key << util::hash_hex(util::fnv1a_str(clf_dir)) << "|"
        << util::hash_hex(util::fnv1a_str(shifted_dir)) << "|method=" << method;
    if (is_synth_method(method) || method == "oracle") {
        key << "|adapt:k=" << cfg_.adapt.k << ",ke=" << cfg_.adapt.k_expanded
            << ",lr=" << cfg_.adapt.lr << ",mom=" << cfg_.adapt.momentum
            << ",epochs=" << cfg_.adapt.epochs << ",batch=" << cfg_.adapt.batch_size
            << ",div=" << cfg_.adapt.diversity_weight;
    }
    if (is_synth_method(method))
        key << "|" << util::hash_hex(util::fnv1a_str(ensure_curated(domain, seed, method)));
    if (method.rfind("memo-", 0) == 0)
        key << "|memo:n=" << cfg_.memo.n_aug << ",steps=" << cfg_.memo.steps
            << ",lr=" << cfg_.memo.lr << ",all=" << cfg_.memo.adapt_all;
    std::string alias = method + "-" + attribute + "-" + domain + "-s" + std::to_string(seed);

    std::string dir = run_stage("eval", alias, key.str(), [&](const std::string& out_dir) {
        const shifts::LabeledDataset& shifted = shifted_target(domain);
        const sfda::ClassifierModel& clf = classifier(attribute, seed);
        double accuracy = 0.0;

        if (method == "source-only") {
            accuracy = sfda::evaluate(clf, shifted, attribute);
        } else if (method == "memo-mixlike" || method == "memo-randconv") {
            sfda::MemoConfig mc;
            mc.n_aug = cfg_.memo.n_aug;
            mc.steps = cfg_.memo.steps;
            mc.lr = cfg_.memo.lr;
            mc.adapt_all = cfg_.memo.adapt_all;
            mc.pool = method == "memo-mixlike" ? sfda::AugPool::kMixlike : sfda::AugPool::kRandConv;
            int attr_idx = shifted.attribute_index(attribute);
            int n = shifted.size();
            std::vector<int> correct(static_cast<size_t>(n), 0);
            uint64_t base = Rng::derive(seed, util::fnv1a_str("memo|" + domain + "|" + method));
            util::parallel_for(n, threads_, [&](int64_t i) {
                sfda::MemoConfig per = mc;
                per.rng_seed = Rng::derive(base, static_cast<uint64_t>(i));
                sfda::MemoResult r = sfda::memo_adapt(clf, shifted.images[static_cast<size_t>(i)], per);
                correct[static_cast<size_t>(i)] =
                    r.predicted == shifted.labels[static_cast<size_t>(i)][static_cast<size_t>(attr_idx)];
            });
            int hits = 0;
            for (int c : correct) hits += c;
            accuracy = 100.0 * hits / n;
        } else if (method == "oracle" || is_synth_method(method)) {
            std::vector<nn::Tensor> unlabeled;
            std::string dataset_hash;
            if (method == "oracle") {
                unlabeled = shifted.images;
                dataset_hash = "target-split";
            } else {
                std::string cur_dir = ensure_curated(domain, seed, method);
                augsample::SyntheticDataset ds = augsample::load_dataset(cur_dir + "/data");
                unlabeled = std::move(ds.images);
                dataset_hash = util::hash_hex(util::fnv1a_file(cur_dir + "/data/provenance.csv"));
            }
            sfda::AdaptConfig ac;
            ac.k = cfg_.adapt.k;
            ac.k_expanded = cfg_.adapt.k_expanded;
            ac.lr = cfg_.adapt.lr;
            ac.momentum = cfg_.adapt.momentum;
            ac.epochs = cfg_.adapt.epochs;
            ac.batch_size = cfg_.adapt.batch_size;
            ac.diversity_weight = cfg_.adapt.diversity_weight;
            ac.rng_seed = Rng::derive(seed, util::fnv1a_str("nrc|" + domain + "|" + attribute + "|" + method));
            sfda::ClassifierModel adapted = sfda::nrc_adapt(clf, unlabeled, ac);
            accuracy = sfda::evaluate(adapted, shifted, attribute);
            sfda::save_classifier(adapted, out_dir + "/model",
                                  {{"method", method}, {"dataset_hash", dataset_hash}});
        } else {
            throw std::invalid_argument("unknown method: " + method);
        }

        util::CsvWriter csv({"method", "attribute", "domain", "seed", "accuracy"});
        csv.add_row({method, attribute, domain, std::to_string(seed),
                     util::format_double(accuracy, 9)});
        csv.save(out_dir + "/metrics.csv");
    });

    util::CsvTable t = util::read_csv(dir + "/metrics.csv");
    if (t.rows.empty()) throw StageError("eval/" + alias, "metrics.csv is empty");
    ResultRow row;
    row.method = t.rows[0][0];
    row.attribute = t.rows[0][1];
    row.domain = t.rows[0][2];
    row.seed = std::stoull(t.rows[0][3]);
    row.accuracy = std::stod(t.rows[0][4]);
    return row;
}

const shifts::LabeledDataset& Pipeline::dataset() {
    std::string dir = ensure_dataset();
    std::lock_guard<std::mutex> lock(mu_);
    if (!dataset_)
        dataset_ = std::make_unique<shifts::LabeledDataset>(shifts::load_labeled_dataset(dir));
    return *dataset_;
}

const shifts::LabeledDataset& Pipeline::shifted_target(const std::string& domain) {
    std::string dir = ensure_shifted(domain);
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = shifted_[domain];
    if (!slot) slot = std::make_unique<shifts::LabeledDataset>(shifts::load_labeled_dataset(dir));
    return *slot;
}

const sfda::ClassifierModel& Pipeline::classifier(const std::string& attribute, uint64_t seed) {
    std::string dir = ensure_classifier(attribute, seed);
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = classifiers_[attribute + "|" + std::to_string(seed)];
    if (!slot) slot = std::make_unique<sfda::ClassifierModel>(sfda::load_classifier(dir + "/model"));
    return *slot;
}

const stylegen::GeneratorModel& Pipeline::source_generator() {
    std::string dir = ensure_gan();
    std::lock_guard<std::mutex> lock(mu_);
    if (!gen_s_)
        gen_s_ = std::make_unique<stylegen::GeneratorModel>(stylegen::load_generator(dir + "/gen"));
    return *gen_s_;
}

const stylegen::DiscriminatorModel& Pipeline::source_discriminator() {
    std::string dir = ensure_gan();
    std::lock_guard<std::mutex> lock(mu_);
    if (!disc_s_)
        disc_s_ = std::make_unique<stylegen::DiscriminatorModel>(
            stylegen::load_discriminator(dir + "/disc"));
    return *disc_s_;
}

const stylegen::GeneratorModel& Pipeline::finetuned_generator(const std::string& domain,
                                                              uint64_t seed) {
    std::string dir = ensure_finetuned(domain, seed);
    std::lock_guard<std::mutex> lock(mu_);
    auto& slot = gen_t_[domain + "|" + std::to_string(seed)];
    if (!slot)
        slot = std::make_unique<stylegen::GeneratorModel>(stylegen::load_generator(dir + "/gen_t"));
    return *slot;
}

augsample::SyntheticDataset Pipeline::curated(const std::string& domain, uint64_t seed,
                                              const std::string& method) {
    std::string dir = ensure_curated(domain, seed, method);
    return augsample::load_dataset(dir + "/data");
}

std::vector<ResultRow> Pipeline::run_all() {
    ensure_dataset();
    dataset();
    for (const auto& domain : cfg_.domains) {
        ensure_shifted(domain);
        shifted_target(domain);
    }

    struct ClfJob {
        std::string attribute;
        uint64_t seed;
    };
    std::vector<ClfJob> clf_jobs;
    for (const auto& attr : cfg_.attributes)
        for (uint64_t seed : cfg_.seeds) clf_jobs.push_back({attr, seed});
    util::parallel_for(static_cast<int64_t>(clf_jobs.size()), threads_, [&](int64_t i) {
        ensure_classifier(clf_jobs[static_cast<size_t>(i)].attribute,
                          clf_jobs[static_cast<size_t>(i)].seed);
    });
    for (const auto& job : clf_jobs) classifier(job.attribute, job.seed);

    bool needs_gan = std::any_of(cfg_.methods.begin(), cfg_.methods.end(), is_synth_method);
    if (needs_gan) {
        ensure_gan();
        source_generator();
        source_discriminator();
        struct FtJob {
            std::string domain;
            uint64_t seed;
        };
        std::vector<FtJob> ft_jobs;
        for (const auto& domain : cfg_.domains)
            for (uint64_t seed : cfg_.seeds) ft_jobs.push_back({domain, seed});
        util::parallel_for(static_cast<int64_t>(ft_jobs.size()), threads_, [&](int64_t i) {
            ensure_finetuned(ft_jobs[static_cast<size_t>(i)].domain,
                             ft_jobs[static_cast<size_t>(i)].seed);
        });
        for (const auto& job : ft_jobs) finetuned_generator(job.domain, job.seed);

        struct CurJob {
            std::string domain;
            uint64_t seed;
            std::string method;
        };
        std::vector<CurJob> cur_jobs;
        for (const auto& method : cfg_.methods) {
            if (!is_synth_method(method)) continue;
            for (const auto& domain : cfg_.domains)
                for (uint64_t seed : cfg_.seeds) cur_jobs.push_back({domain, seed, method});
        }
        util::parallel_for(static_cast<int64_t>(cur_jobs.size()), threads_, [&](int64_t i) {
            const CurJob& j = cur_jobs[static_cast<size_t>(i)];
            ensure_curated(j.domain, j.seed, j.method);
        });
    }

    struct Cell {
        std::string domain, attribute, method;
        uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& method : cfg_.methods)
        for (const auto& attr : cfg_.attributes)
            for (const auto& domain : cfg_.domains)
                for (uint64_t seed : cfg_.seeds) cells.push_back({domain, attr, method, seed});

    std::vector<ResultRow> rows(cells.size());
    util::parallel_for(static_cast<int64_t>(cells.size()), threads_, [&](int64_t i) {
        const Cell& c = cells[static_cast<size_t>(i)];
        rows[static_cast<size_t>(i)] = ensure_cell(c.domain, c.attribute, c.seed, c.method);
    });

    std::string out_dir = results_dir();
    write_results_csv(rows, out_dir + "/results.csv");
    std::ofstream cfg_copy(out_dir + "/config.json");
    cfg_copy << config_to_json_text(cfg_);
    return rows;
}

std::string Pipeline::results_dir() {
    std::string key = util::hash_hex(util::fnv1a_str(canonical_config_json(cfg_)));
    fs::path dir = fs::path(cfg_.artifact_root) / "results" / key;
    fs::create_directories(dir);
    make_alias(fs::path(cfg_.artifact_root) / "results", "latest", key);
    return dir.string();
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    util::CsvWriter csv({"method", "attribute", "domain", "seed", "accuracy"});
    for (const auto& r : rows)
        csv.add_row({r.method, r.attribute, r.domain, std::to_string(r.seed),
                     util::format_double(r.accuracy, 9)});
    csv.save(path);
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
    util::CsvTable t = util::read_csv(path);
    std::vector<ResultRow> rows;
    for (const auto& r : t.rows) {
        ResultRow row;
        row.method = r[0];
        row.attribute = r[1];
        row.domain = r[2];
        row.seed = std::stoull(r[3]);
        row.accuracy = std::stod(r[4]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace genaug::cli
