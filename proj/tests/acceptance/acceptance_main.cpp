// Acceptance suite: runs every acceptance criterion end to end against the
// desk-scale experiment configuration and prints one PASS/FAIL line per
// criterion. Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "genaug/adapt_gan/adapt_gan.hpp"
#include "genaug/augsample/augsample.hpp"
#include "genaug/cli/config.hpp"
#include "genaug/cli/pipeline.hpp"
#include "genaug/cli/report.hpp"
#include "genaug/inversion/inversion.hpp"
#include "genaug/nn/rng.hpp"
#include "genaug/sfda/sfda.hpp"
#include "genaug/util/csv.hpp"
#include "genaug/util/thread_pool.hpp"

using namespace genaug;
using nn::Rng;
using nn::Tensor;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// The desk-scale experiment the directional criteria run on.
cli::ExperimentConfig acceptance_config(const std::string& root) {
    cli::ExperimentConfig cfg;  // defaults carry the pinned values
    cfg.artifact_root = root;
    cfg.threads = 0;
    return cfg;
}

// Reduced configuration for the double-run reproducibility criterion.
cli::ExperimentConfig reduced_config(const std::string& root) {
    cli::ExperimentConfig cfg;
    cfg.artifact_root = root;
    cfg.threads = 0;
    cfg.seeds = {0};
    cfg.attributes = {"square", "large"};
    cfg.domains = {"C"};
    cfg.methods = {"source-only", "memo-mixlike", "synth-base", "synth-prune-zero", "oracle"};
    cfg.data.n = 160;
    cfg.gan.steps = 60;
    cfg.classifier.epochs = 2;
    cfg.inversion.steps = 20;
    cfg.finetune.iterations = 20;
    cfg.curate.samples = 40;
    cfg.adapt.epochs = 2;
    cfg.memo.n_aug = 8;
    return cfg;
}

// ---------------------------------------------------------------------------
// criterion 1: pruning oracle equivalence
// ---------------------------------------------------------------------------

float oracle_percentile(std::vector<float> values, double p) {
    std::sort(values.begin(), values.end());
    int64_t n = static_cast<int64_t>(values.size());
    int64_t rank = static_cast<int64_t>(std::ceil(p * static_cast<double>(n) / 100.0));
    rank = std::max<int64_t>(1, std::min(rank, n));
    return values[static_cast<size_t>(rank - 1)];
}

Tensor oracle_prune(const Tensor& act_t, const Tensor* act_s, double p, bool rewind) {
    int k = act_t.dim(0);
    int64_t hw = static_cast<int64_t>(act_t.dim(1)) * act_t.dim(2);
    Tensor out = act_t;
    for (int c = 0; c < k; ++c) {
        std::vector<float> channel(act_t.data() + c * hw, act_t.data() + (c + 1) * hw);
        float tau = oracle_percentile(channel, p);
        for (int64_t i = 0; i < hw; ++i)
            if (act_t[c * hw + i] < tau) out[c * hw + i] = rewind ? (*act_s)[c * hw + i] : 0.0f;
    }
    return out;
}

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(20260810);
    const double ps[] = {0.0, 20.0, 50.0, 80.0, 100.0};
    int checked = 0;
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        int k = rng.uniform_int(1, 8);
        int h = rng.uniform_int(1, 16);
        int w = rng.uniform_int(1, 16);
        Tensor t({k, h, w}), s({k, h, w});
        for (int64_t i = 0; i < t.size(); ++i) {
            t[i] = static_cast<float>(rng.normal());
            s[i] = static_cast<float>(rng.normal());
        }
        double p = ps[trial % 5];
        stylegen::ActivationTensor at{t, 1}, as{s, 1};

        augsample::PruneConfig zc;
        zc.strategy = augsample::PruneStrategy::kPruneZero;
        zc.p = p;
        ok = ok && tensors_equal(augsample::apply_prune(at, nullptr, zc).values,
                                 oracle_prune(t, nullptr, p, false));
        augsample::PruneConfig rc;
        rc.strategy = augsample::PruneStrategy::kPruneRewind;
        rc.p = p;
        ok = ok && tensors_equal(augsample::apply_prune(at, &as, rc).values,
                                 oracle_prune(t, &s, p, true));
        ++checked;
    }
    double elapsed = seconds_since(t0);
    ok = ok && elapsed < 60.0;
    std::ostringstream os;
    os << "pruning matches the sort-based oracle bit-exactly on " << checked
       << " random tensors, both strategies (" << util::format_double(elapsed, 1) << "s)";
    report(1, ok, os.str());
}

// ---------------------------------------------------------------------------
// criterion 2: sampling identities
// ---------------------------------------------------------------------------

void criterion_2() {
    stylegen::GeneratorConfig gc;
    gc.latent_dim = 32;
    gc.style_dim = 32;
    gc.layers = 8;
    gc.image_size = 32;
    gc.base_channels = 32;
    gc.init_seed = 91;
    stylegen::GeneratorModel gen_t(gc);
    gc.init_seed = 92;
    stylegen::GeneratorModel gen_s(gc);

    bool ok = true;
    std::string failed;
    for (uint64_t seed = 1; seed <= 20 && ok; ++seed) {
        augsample::PruneConfig base;
        base.strategy = augsample::PruneStrategy::kBase;
        Tensor base_img = augsample::sample_one(gen_t, gen_s, base, seed).image;

        stylegen::StyleCode code = stylegen::sample_wplus(gen_t, Rng::derive(seed, 0));
        if (!tensors_equal(base_img, stylegen::synthesize(gen_t, code).image)) {
            ok = false;
            failed = "base vs plain synthesis";
            break;
        }
        for (auto strat :
             {augsample::PruneStrategy::kPruneZero, augsample::PruneStrategy::kPruneRewind}) {
            augsample::PruneConfig g0;
            g0.strategy = strat;
            g0.gate_probability = 0.0;
            if (!tensors_equal(augsample::sample_one(gen_t, gen_s, g0, seed).image, base_img)) {
                ok = false;
                failed = "gate probability 0";
            }
        }
        augsample::PruneConfig self_rewind;
        self_rewind.strategy = augsample::PruneStrategy::kPruneRewind;
        self_rewind.gate_probability = 1.0;
        self_rewind.p = 35.0;
        if (!tensors_equal(augsample::sample_one(gen_t, gen_t, self_rewind, seed).image,
                           base_img)) {
            ok = false;
            failed = "self-rewind";
        }
        augsample::PruneConfig p0;
        p0.strategy = augsample::PruneStrategy::kPruneZero;
        p0.gate_probability = 1.0;
        p0.p = 0.0;
        if (!tensors_equal(augsample::sample_one(gen_t, gen_s, p0, seed).image, base_img)) {
            ok = false;
            failed = "p=0";
        }
    }
    report(2, ok,
           ok ? "base / gate-0 / self-rewind / p=0 identities exact over 20 seeds"
              : "identity broken: " + failed);
}

// ---------------------------------------------------------------------------
// criterion 3: style-mix locality
// ---------------------------------------------------------------------------

void criterion_3() {
    bool ok = true;
    int L = 8, D = 64;
    for (uint64_t trial = 0; trial < 100 && ok; ++trial) {
        Rng rng(trial + 400);
        stylegen::StyleCode code{nn::randn_tensor({L, D}, rng)};
        Tensor r = nn::randn_tensor({D}, rng);
        int mix_start = 1 + static_cast<int>(trial % static_cast<uint64_t>(L + 1));
        stylegen::StyleCode mixed = adapt_gan::style_mix(code, r, mix_start);
        for (int l = 0; l < mix_start - 1 && ok; ++l)
            for (int d = 0; d < D; ++d)
                if (mixed.rows.at(l, d) != code.rows.at(l, d)) ok = false;
        for (int l = mix_start - 1; l < L && ok; ++l)
            for (int d = 0; d < D; ++d)
                if (mixed.rows.at(l, d) != r[d]) ok = false;
    }
    report(3, ok, "row replacement exact (below bit-unchanged, at/above equal r) on 100 codes");
}

// ---------------------------------------------------------------------------
// criterion 4: Eq-style feature-matching descent over fine-tuning
// ---------------------------------------------------------------------------

void criterion_4(cli::Pipeline& pipeline) {
    auto t0 = std::chrono::steady_clock::now();
    const cli::ExperimentConfig& cfg = pipeline.config();
    const stylegen::GeneratorModel& gen_s = pipeline.source_generator();
    const stylegen::DiscriminatorModel& disc_s = pipeline.source_discriminator();

    std::vector<double> drops;
    for (uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        const shifts::LabeledDataset& shifted = pipeline.shifted_target("C");
        int idx = pipeline.target_image_index("C", seed);
        const Tensor& x_t = shifted.images[static_cast<size_t>(idx)];

        inversion::InversionConfig ic;
        ic.steps = cfg.inversion.steps;
        ic.lr = cfg.inversion.lr;
        ic.feature_weight = cfg.inversion.feature_weight;
        ic.mean_style_draws = cfg.inversion.mean_style_draws;
        ic.rng_seed = Rng::derive(seed, 0xacc4);
        inversion::InversionResult inv = inversion::invert(gen_s, disc_s, x_t, ic);

        adapt_gan::FinetuneConfig fc;
        fc.iterations = 300;
        fc.lr = cfg.finetune.lr;
        fc.norm = adapt_gan::loss_norm_from_string(cfg.finetune.norm);
        fc.rng_seed = Rng::derive(seed, 0xacc5);
        stylegen::GeneratorModel gen_t =
            adapt_gan::finetune_single_shot(gen_s, disc_s, x_t, inv, fc);

        double before = adapt_gan::feature_match_loss(
            disc_s, stylegen::synthesize(gen_s, inv.code).image, x_t, fc.norm);
        double after = adapt_gan::feature_match_loss(
            disc_s, stylegen::synthesize(gen_t, inv.code).image, x_t, fc.norm);
        drops.push_back(before > 0 ? (before - after) / before : 0.0);
    }
    std::sort(drops.begin(), drops.end());
    double median = drops[1];
    double elapsed = seconds_since(t0);
    bool ok = median >= 0.5 && elapsed < 600.0;
    std::ostringstream os;
    os << "N=300 fine-tuning drops the un-mixed feature-matching loss by "
       << util::format_double(100.0 * median, 1) << "% median over 3 seeds ("
       << util::format_double(elapsed, 1) << "s, budget 600s)";
    report(4, ok, os.str());
}

// ---------------------------------------------------------------------------
// criteria 5-6: directional orderings from the full grid
// ---------------------------------------------------------------------------

double mean_of(const std::vector<cli::ResultRow>& rows, const std::string& method,
               const std::string& domain = "", const std::string& attribute = "") {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        if (!domain.empty() && r.domain != domain) continue;
        if (!attribute.empty() && r.attribute != attribute) continue;
        sum += r.accuracy;
        ++n;
    }
    return n > 0 ? sum / n : 0.0;
}

void criterion_5(const std::vector<cli::ResultRow>& rows,
                 const std::vector<std::string>& attributes) {
    int satisfied = 0;
    std::ostringstream os;
    for (const auto& attr : attributes) {
        double a = mean_of(rows, "source-only", "A", attr);
        double b = mean_of(rows, "source-only", "B", attr);
        double c = mean_of(rows, "source-only", "C", attr);
        bool ordered = a >= b && b >= c;
        satisfied += ordered;
        os << attr << ": A=" << util::format_double(a, 1) << " B=" << util::format_double(b, 1)
           << " C=" << util::format_double(c, 1) << (ordered ? " (ok) " : " (violated) ");
    }
    bool ok = satisfied >= 3;
    os << "-> ordered for " << satisfied << "/" << attributes.size() << " attributes (need 3)";
    report(5, ok, os.str());
}

void criterion_6(const std::vector<cli::ResultRow>& rows, double elapsed_seconds) {
    double src_c = mean_of(rows, "source-only", "C");
    double base_c = mean_of(rows, "synth-base", "C");
    bool a_ok = base_c - src_c >= 3.0;

    double base_avg = mean_of(rows, "synth-base");
    double pz_avg = mean_of(rows, "synth-prune-zero");
    double pr_avg = mean_of(rows, "synth-prune-rewind");
    double best_prune = std::max(pz_avg, pr_avg);
    bool b_ok = best_prune >= base_avg;

    double oracle_avg = mean_of(rows, "oracle");
    bool c_ok = oracle_avg >= base_avg && oracle_avg >= pz_avg && oracle_avg >= pr_avg;

    double memo_c = std::max(mean_of(rows, "memo-mixlike", "C"), mean_of(rows, "memo-randconv", "C"));
    double pz_c = mean_of(rows, "synth-prune-zero", "C");
    double pr_c = mean_of(rows, "synth-prune-rewind", "C");
    bool d_ok = memo_c <= base_c && memo_c <= pz_c && memo_c <= pr_c;

    bool budget_ok = elapsed_seconds <= 7200.0;
    bool ok = a_ok && b_ok && c_ok && d_ok && budget_ok;
    std::ostringstream os;
    os << "(a) base-vs-source on C: +" << util::format_double(base_c - src_c, 2)
       << (a_ok ? " ok" : " FAIL") << "; (b) best prune " << util::format_double(best_prune, 2)
       << " vs base " << util::format_double(base_avg, 2) << (b_ok ? " ok" : " FAIL")
       << "; (c) oracle " << util::format_double(oracle_avg, 2) << (c_ok ? " ok" : " FAIL")
       << "; (d) memo on C " << util::format_double(memo_c, 2) << (d_ok ? " ok" : " FAIL")
       << "; grid runtime " << util::format_double(elapsed_seconds, 0) << "s"
       << (budget_ok ? " ok" : " FAIL");
    report(6, ok, os.str());
}

// ---------------------------------------------------------------------------
// criterion 7: diversity of prune-zero sampling
// ---------------------------------------------------------------------------

double mean_pairwise_l2(const std::vector<Tensor>& images) {
    double sum = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < images.size(); ++i)
        for (size_t j = i + 1; j < images.size(); ++j) {
            double d2 = 0.0;
            for (int64_t k = 0; k < images[i].size(); ++k) {
                double d = static_cast<double>(images[i][k]) - images[j][k];
                d2 += d * d;
            }
            sum += std::sqrt(d2);
            ++pairs;
        }
    return sum / pairs;
}

void criterion_7(cli::Pipeline& pipeline) {
    const cli::ExperimentConfig& cfg = pipeline.config();
    int wins = 0;
    std::ostringstream os;
    for (const auto& domain : cfg.domains) {
        uint64_t seed = cfg.seeds.front();
        const stylegen::GeneratorModel& gen_t = pipeline.finetuned_generator(domain, seed);
        const stylegen::GeneratorModel& gen_s = pipeline.source_generator();

        augsample::PruneConfig base;
        base.strategy = augsample::PruneStrategy::kBase;
        base.rng_seed = 515151;
        augsample::PruneConfig pz = base;
        pz.strategy = augsample::PruneStrategy::kPruneZero;
        pz.p = cfg.curate.prune_zero_p;
        pz.prune_start = adapt_gan::default_mix_start(cfg.gan.layers);
        pz.gate_probability = cfg.curate.gate_probability;

        auto base_ds = augsample::curate_dataset(gen_t, gen_s, base, 100, pipeline.threads());
        auto pz_ds = augsample::curate_dataset(gen_t, gen_s, pz, 100, pipeline.threads());
        double base_div = mean_pairwise_l2(base_ds.images);
        double pz_div = mean_pairwise_l2(pz_ds.images);
        bool win = pz_div >= base_div;
        wins += win;
        os << domain << ": prune-zero " << util::format_double(pz_div, 3) << " vs base "
           << util::format_double(base_div, 3) << (win ? " (ok) " : " (lower) ");
    }
    bool ok = wins >= 2;
    os << "-> " << wins << "/3 domains (need 2)";
    report(7, ok, os.str());
}

// ---------------------------------------------------------------------------
// criterion 8: MEMO marginal-entropy descent
// ---------------------------------------------------------------------------

void criterion_8(cli::Pipeline& pipeline) {
    const cli::ExperimentConfig& cfg = pipeline.config();
    const shifts::LabeledDataset& shifted = pipeline.shifted_target("C");
    const sfda::ClassifierModel& clf = pipeline.classifier(cfg.attributes.front(), cfg.seeds.front());

    int total = std::min(100, shifted.size());
    std::vector<int> good(static_cast<size_t>(total), 0);
    util::parallel_for(total, pipeline.threads(), [&](int64_t i) {
        sfda::MemoConfig mc;
        mc.n_aug = cfg.memo.n_aug;
        mc.steps = cfg.memo.steps;
        mc.lr = cfg.memo.lr;
        mc.pool = sfda::AugPool::kMixlike;
        mc.rng_seed = Rng::derive(0x6d656d6fULL, static_cast<uint64_t>(i));
        sfda::MemoResult r = sfda::memo_adapt(clf, shifted.images[static_cast<size_t>(i)], mc);
        good[static_cast<size_t>(i)] = r.entropy_after <= r.entropy_before + 1e-9;
    });
    int count = std::accumulate(good.begin(), good.end(), 0);
    bool ok = count * 100 >= total * 95;
    std::ostringstream os;
    os << "marginal entropy non-increasing for " << count << "/" << total << " images (need 95%)";
    report(8, ok, os.str());
}

// ---------------------------------------------------------------------------
// criterion 9: byte-identical results across independent runs
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void criterion_9(const std::string& root) {
    std::string root_a = root + "/repro_a";
    std::string root_b = root + "/repro_b";
    std::filesystem::remove_all(root_a);
    std::filesystem::remove_all(root_b);

    cli::Pipeline pa(reduced_config(root_a));
    pa.run_all();
    std::string csv_a = slurp(pa.results_dir() + "/results.csv");

    cli::Pipeline pb(reduced_config(root_b));
    pb.run_all();
    std::string csv_b = slurp(pb.results_dir() + "/results.csv");

    bool ok = !csv_a.empty() && csv_a == csv_b;
    report(9, ok,
           ok ? "two independent run-all executions produced byte-identical results CSVs"
              : "results CSVs differ between runs");
}

}  // namespace

int main(int argc, char** argv) {
    std::string root = "acceptance_artifacts";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--artifacts") root = argv[i + 1];
    std::filesystem::create_directories(root);
    std::printf("artifact root: %s\n", root.c_str());

    criterion_1();
    criterion_2();
    criterion_3();

    cli::ExperimentConfig cfg = acceptance_config(root);
    cli::Pipeline pipeline(cfg);

    // The source GAN is the shared fixture; its training cost is amortized
    // into the artifact cache and excluded from the grid budget.
    std::printf("building fixture (dataset, shifts, source GAN)...\n");
    std::fflush(stdout);
    pipeline.ensure_dataset();
    for (const auto& d : cfg.domains) pipeline.ensure_shifted(d);
    pipeline.ensure_gan();

    criterion_4(pipeline);

    auto grid_t0 = std::chrono::steady_clock::now();
    std::vector<cli::ResultRow> rows = pipeline.run_all();
    double grid_elapsed = seconds_since(grid_t0);

    criterion_5(rows, cfg.attributes);
    criterion_6(rows, grid_elapsed);
    criterion_7(pipeline);
    criterion_8(pipeline);
    criterion_9(root);

    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
