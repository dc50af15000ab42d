#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "genaug/augsample/augsample.hpp"
#include "genaug/nn/rng.hpp"

using namespace genaug;
using namespace genaug::augsample;
using nn::Rng;
using nn::Tensor;
using stylegen::ActivationTensor;
using stylegen::GeneratorConfig;
using stylegen::GeneratorModel;

namespace {

// Independent sort-based oracle: full ascending sort per channel, nearest
// rank by the stated formula, plain elementwise rewrite.
float oracle_percentile(std::vector<float> values, double p) {
    std::sort(values.begin(), values.end());
    int64_t n = static_cast<int64_t>(values.size());
    int64_t rank = static_cast<int64_t>(std::ceil(p * static_cast<double>(n) / 100.0));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[static_cast<size_t>(rank - 1)];
}

Tensor oracle_prune(const Tensor& act_t, const Tensor* act_s, double p, bool rewind) {
    int k = act_t.dim(0);
    int64_t hw = static_cast<int64_t>(act_t.dim(1)) * act_t.dim(2);
    Tensor out = act_t;
    for (int c = 0; c < k; ++c) {
        std::vector<float> channel(act_t.data() + c * hw, act_t.data() + (c + 1) * hw);
        float tau = oracle_percentile(channel, p);
        for (int64_t i = 0; i < hw; ++i) {
            float v = act_t[c * hw + i];
            if (v < tau) out[c * hw + i] = rewind ? (*act_s)[c * hw + i] : 0.0f;
        }
    }
    return out;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (int64_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

GeneratorModel tiny_gen(uint64_t seed = 5) {
    GeneratorConfig cfg;
    cfg.latent_dim = 16;
    cfg.style_dim = 16;
    cfg.layers = 4;
    cfg.image_size = 16;
    cfg.base_channels = 16;
    cfg.init_seed = seed;
    return GeneratorModel(cfg);
}

}  // namespace

TEST_CASE("channel_percentile: spec examples") {
    Tensor c = Tensor::from_values({2, 2}, {1, 2, 3, 4});
    CHECK(channel_percentile(c, 50.0) == 2.0f);
    CHECK(channel_percentile(c, 0.0) == 1.0f);
    CHECK(channel_percentile(c, 100.0) == 4.0f);
    Tensor single = Tensor::from_values({1, 1}, {7});
    CHECK(channel_percentile(single, 50.0) == 7.0f);
    CHECK_THROWS(channel_percentile(c, 101.0));
    CHECK_THROWS(channel_percentile(c.data(), 0, 50.0));
}

TEST_CASE("channel_percentile matches the sort oracle on random channels") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        int n = rng.uniform_int(1, 64);
        std::vector<float> values(static_cast<size_t>(n));
        for (float& v : values) v = static_cast<float>(rng.normal());
        // duplicates make ties likely
        if (n > 3) values[1] = values[0];
        double p = rng.uniform(0.0, 100.0);
        CHECK(channel_percentile(values.data(), n, p) == oracle_percentile(values, p));
    }
}

TEST_CASE("apply_prune: spec examples") {
    ActivationTensor act{Tensor::from_values({1, 2, 2}, {1, 2, 3, 4}), 1};

    PruneConfig zero_cfg;
    zero_cfg.strategy = PruneStrategy::kPruneZero;
    zero_cfg.p = 50.0;
    ActivationTensor pruned = apply_prune(act, nullptr, zero_cfg);
    CHECK(pruned.values[0] == 0.0f);
    CHECK(pruned.values[1] == 2.0f);
    CHECK(pruned.values[2] == 3.0f);
    CHECK(pruned.values[3] == 4.0f);

    ActivationTensor src{Tensor::from_values({1, 2, 2}, {9, 8, 7, 6}), 1};
    PruneConfig rewind_cfg;
    rewind_cfg.strategy = PruneStrategy::kPruneRewind;
    rewind_cfg.p = 50.0;
    ActivationTensor rewound = apply_prune(act, &src, rewind_cfg);
    CHECK(rewound.values[0] == 9.0f);
    CHECK(rewound.values[1] == 2.0f);
    CHECK(rewound.values[2] == 3.0f);
    CHECK(rewound.values[3] == 4.0f);

    PruneConfig p0;
    p0.strategy = PruneStrategy::kPruneZero;
    p0.p = 0.0;
    CHECK(tensors_equal(apply_prune(act, nullptr, p0).values, act.values));

    CHECK_THROWS(apply_prune(act, nullptr, rewind_cfg));  // missing source
    ActivationTensor bad{Tensor::from_values({1, 1, 2}, {1, 2}), 1};
    CHECK_THROWS(apply_prune(act, &bad, rewind_cfg));  // shape mismatch
}

TEST_CASE("apply_prune matches the brute-force oracle bit-exactly") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        int k = rng.uniform_int(1, 8);
        int h = rng.uniform_int(1, 16);
        int w = rng.uniform_int(1, 16);
        Tensor t({k, h, w});
        Tensor s({k, h, w});
        for (int64_t i = 0; i < t.size(); ++i) {
            t[i] = static_cast<float>(rng.normal());
            s[i] = static_cast<float>(rng.normal());
        }
        const double ps[] = {0.0, 20.0, 50.0, 80.0, 100.0};
        double p = ps[trial % 5];

        PruneConfig zc;
        zc.strategy = PruneStrategy::kPruneZero;
        zc.p = p;
        ActivationTensor at{t, 1};
        CHECK(tensors_equal(apply_prune(at, nullptr, zc).values, oracle_prune(t, nullptr, p, false)));

        PruneConfig rc;
        rc.strategy = PruneStrategy::kPruneRewind;
        rc.p = p;
        ActivationTensor as{s, 1};
        CHECK(tensors_equal(apply_prune(at, &as, rc).values, oracle_prune(t, &s, p, true)));
    }
}

TEST_CASE("apply_prune: survivor invariance and max survival") {
    Rng rng(321);
    Tensor t({3, 6, 6});
    for (int64_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.normal());
    ActivationTensor act{t, 2};
    for (double p : {5.0, 37.5, 50.0, 93.0, 100.0}) {
        PruneConfig cfg;
        cfg.strategy = PruneStrategy::kPruneZero;
        cfg.p = p;
        ActivationTensor out = apply_prune(act, nullptr, cfg);
        int64_t hw = 36;
        for (int c = 0; c < 3; ++c) {
            std::vector<float> channel(t.data() + c * hw, t.data() + (c + 1) * hw);
            float tau = oracle_percentile(channel, p);
            float max_v = *std::max_element(channel.begin(), channel.end());
            bool max_seen = false;
            for (int64_t i = 0; i < hw; ++i) {
                float orig = t[c * hw + i];
                float now = out.values[c * hw + i];
                if (orig >= tau) CHECK(now == orig);   // survivors bit-unchanged
                if (now != orig) CHECK(orig < tau);    // only sub-threshold entries rewritten
                if (orig == max_v && now == orig) max_seen = true;
            }
            CHECK(max_seen);  // the channel max is never pruned
        }
    }
}

TEST_CASE("sample_one: base strategy equals plain synthesis") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kBase;
    Sample s = sample_one(gen_t, gen_s, cfg, 42);
    stylegen::StyleCode code = stylegen::sample_wplus(gen_t, Rng::derive(42, 0));
    CHECK(tensors_equal(s.image, stylegen::synthesize(gen_t, code).image));
    CHECK(s.provenance.gated_layers.empty());
}

TEST_CASE("sample_one: gate probability zero equals base for any strategy") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig base;
    base.strategy = PruneStrategy::kBase;
    for (PruneStrategy strat : {PruneStrategy::kPruneZero, PruneStrategy::kPruneRewind}) {
        PruneConfig cfg;
        cfg.strategy = strat;
        cfg.gate_probability = 0.0;
        for (uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
            Sample gated = sample_one(gen_t, gen_s, cfg, seed);
            Sample plain = sample_one(gen_t, gen_s, base, seed);
            CHECK(tensors_equal(gated.image, plain.image));
        }
    }
}

TEST_CASE("sample_one: self-rewind is the identity") {
    GeneratorModel gen_t = tiny_gen(5);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kPruneRewind;
    cfg.p = 60.0;
    cfg.gate_probability = 1.0;
    cfg.prune_start = 2;
    PruneConfig base;
    base.strategy = PruneStrategy::kBase;
    for (uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        Sample rewound = sample_one(gen_t, gen_t, cfg, seed);
        Sample plain = sample_one(gen_t, gen_t, base, seed);
        CHECK(tensors_equal(rewound.image, plain.image));
    }
}

TEST_CASE("sample_one: p=0 equals base") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kPruneZero;
    cfg.p = 0.0;
    cfg.gate_probability = 1.0;
    PruneConfig base;
    base.strategy = PruneStrategy::kBase;
    for (uint64_t seed : {11ULL, 12ULL}) {
        CHECK(tensors_equal(sample_one(gen_t, gen_s, cfg, seed).image,
                            sample_one(gen_t, gen_s, base, seed).image));
    }
}

TEST_CASE("sample_one: gate probability one gates every layer in range") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kPruneZero;
    cfg.p = 50.0;
    cfg.gate_probability = 1.0;
    cfg.prune_start = 2;
    Sample s = sample_one(gen_t, gen_s, cfg, 5);
    std::vector<int> expected = {2, 3, 4};
    CHECK(s.provenance.gated_layers == expected);
}

TEST_CASE("sample_one rejects architecture mismatch and bad prune_start") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorConfig other_cfg = gen_t.config();
    other_cfg.style_dim = 8;
    GeneratorModel other(other_cfg);
    PruneConfig cfg;
    CHECK_THROWS(sample_one(gen_t, other, cfg, 1));
    PruneConfig bad;
    bad.prune_start = 99;
    CHECK_THROWS(sample_one(gen_t, gen_t, bad, 1));
}

TEST_CASE("curate_dataset: reproducible and provenance-replayable") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kPruneZero;
    cfg.p = 50.0;
    cfg.rng_seed = 314;

    SyntheticDataset a = curate_dataset(gen_t, gen_s, cfg, 6, 1);
    SyntheticDataset b = curate_dataset(gen_t, gen_s, cfg, 6, 2);  // thread count must not matter
    REQUIRE(a.images.size() == 6);
    for (size_t i = 0; i < a.images.size(); ++i) {
        CHECK(tensors_equal(a.images[i], b.images[i]));
        CHECK(a.provenance[i].seed == b.provenance[i].seed);
        // Replaying the provenance reproduces the image bit-exactly.
        Sample replay = sample_one(gen_t, gen_s, cfg, a.provenance[i].seed);
        CHECK(tensors_equal(replay.image, a.images[i]));
        CHECK(replay.provenance.gated_layers == a.provenance[i].gated_layers);
    }
    CHECK_THROWS(curate_dataset(gen_t, gen_s, cfg, 0));
}

TEST_CASE("synthetic dataset save/load roundtrip") {
    GeneratorModel gen_t = tiny_gen(5);
    GeneratorModel gen_s = tiny_gen(6);
    PruneConfig cfg;
    cfg.strategy = PruneStrategy::kPruneRewind;
    cfg.p = 20.0;
    cfg.rng_seed = 2718;
    SyntheticDataset ds = curate_dataset(gen_t, gen_s, cfg, 4, 1);
    std::string dir = "test_synth_ds";
    save_dataset(ds, dir, "hash_t", "hash_s");
    SyntheticDataset loaded = load_dataset(dir);
    REQUIRE(loaded.images.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(tensors_equal(loaded.images[i], ds.images[i]));
        CHECK(loaded.provenance[i].seed == ds.provenance[i].seed);
        CHECK(loaded.provenance[i].gated_layers == ds.provenance[i].gated_layers);
        CHECK(loaded.provenance[i].strategy == ds.provenance[i].strategy);
    }
    std::filesystem::remove_all(dir);
}
