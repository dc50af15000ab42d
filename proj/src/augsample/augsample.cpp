#include "genaug/augsample/augsample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "genaug/nn/rng.hpp"
#include "genaug/util/csv.hpp"
#include "genaug/util/image_io.hpp"
#include "genaug/util/thread_pool.hpp"

namespace genaug::augsample {

namespace fs = std::filesystem;
using nn::Rng;

std::string to_string(PruneStrategy s) {
    switch (s) {
        case PruneStrategy::kBase: return "base";
        case PruneStrategy::kPruneZero: return "prune-zero";
        case PruneStrategy::kPruneRewind: return "prune-rewind";
    }
    return "base";
}

PruneStrategy prune_strategy_from_string(const std::string& s) {
    if (s == "base") return PruneStrategy::kBase;
    if (s == "prune-zero") return PruneStrategy::kPruneZero;
    if (s == "prune-rewind") return PruneStrategy::kPruneRewind;
    throw std::invalid_argument("unknown prune strategy: " + s);
}

float channel_percentile(const float* values, int64_t count, double p) {
    if (count <= 0) throw std::invalid_argument("channel_percentile: empty channel");
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("channel_percentile: p outside [0,100]");
    int64_t rank = static_cast<int64_t>(std::ceil(p * static_cast<double>(count) / 100.0));
    rank = std::max<int64_t>(1, std::min(rank, count));
    std::vector<float> copy(values, values + count);
    std::nth_element(copy.begin(), copy.begin() + (rank - 1), copy.end());
    return copy[static_cast<size_t>(rank - 1)];
}

float channel_percentile(const Tensor& channel, double p) {
    return channel_percentile(channel.data(), channel.size(), p);
}

ActivationTensor apply_prune(const ActivationTensor& act_t, const ActivationTensor* act_s,
                             const PruneConfig& cfg) {
    if (cfg.strategy == PruneStrategy::kPruneRewind) {
        if (!act_s) throw std::invalid_argument("apply_prune: prune-rewind needs source activations");
        if (!act_s->values.same_shape(act_t.values))
            throw std::invalid_argument("apply_prune: source/target activation shape mismatch");
    }
    ActivationTensor out{act_t.values, act_t.layer_index};
    if (cfg.strategy == PruneStrategy::kBase) return out;

    int k = act_t.channels();
    int64_t hw = static_cast<int64_t>(act_t.height()) * act_t.width();
    for (int c = 0; c < k; ++c) {
        const float* src = act_t.values.data() + c * hw;
        float tau = channel_percentile(src, hw, cfg.p);
        float* dst = out.values.data() + c * hw;
        if (cfg.strategy == PruneStrategy::kPruneZero) {
            for (int64_t i = 0; i < hw; ++i)
                if (src[i] < tau) dst[i] = 0.0f;
        } else {
            const float* rw = act_s->values.data() + c * hw;
            for (int64_t i = 0; i < hw; ++i)
                if (src[i] < tau) dst[i] = rw[i];
        }
    }
    return out;
}

Sample sample_one(const GeneratorModel& gen_t, const GeneratorModel& gen_s,
                  const PruneConfig& cfg, uint64_t rng_seed) {
    if (!stylegen::same_architecture(gen_t.config(), gen_s.config()))
        throw std::invalid_argument("sample_one: generators are architecturally different");
    int layers = gen_t.layers();
    if (cfg.prune_start < 1 || cfg.prune_start > layers + 1)
        throw std::invalid_argument("sample_one: prune_start outside [1, L+1]");

    Sample sample;
    sample.provenance.seed = rng_seed;
    sample.provenance.strategy = cfg.strategy;
    sample.provenance.p = cfg.p;

    uint64_t w_seed = Rng::derive(rng_seed, 0);
    stylegen::StyleCode code = stylegen::sample_wplus(gen_t, w_seed);
    if (cfg.truncation_psi != 1.0) {
        Tensor center = stylegen::mean_style(gen_t, 1024, 0x74727563);
        for (int l = 0; l < code.layers(); ++l)
            for (int d = 0; d < code.dim(); ++d)
                code.rows.at(l, d) = center[d] + static_cast<float>(cfg.truncation_psi) *
                                                     (code.rows.at(l, d) - center[d]);
    }

    std::vector<int> gated;
    if (cfg.strategy != PruneStrategy::kBase) {
        Rng gate_rng(Rng::derive(rng_seed, 1));
        for (int l = cfg.prune_start; l <= layers; ++l)
            if (gate_rng.bernoulli(cfg.gate_probability)) gated.push_back(l);
    }
    sample.provenance.gated_layers = gated;

    if (gated.empty()) {
        sample.image = stylegen::synthesize(gen_t, code).image;
        return sample;
    }

    std::vector<ActivationTensor> source_acts;
    if (cfg.strategy == PruneStrategy::kPruneRewind)
        source_acts = stylegen::synthesize(gen_s, code).activations;

    stylegen::InterceptPlan plan;
    for (int l : gated) {
        if (cfg.strategy == PruneStrategy::kPruneZero) {
            plan[l] = [&cfg](const ActivationTensor& act) { return apply_prune(act, nullptr, cfg); };
        } else {
            const ActivationTensor* src = &source_acts[static_cast<size_t>(l - 1)];
            plan[l] = [&cfg, src](const ActivationTensor& act) { return apply_prune(act, src, cfg); };
        }
    }
    sample.image = stylegen::synthesize(gen_t, code, &plan).image;
    return sample;
}

SyntheticDataset curate_dataset(const GeneratorModel& gen_t, const GeneratorModel& gen_s,
                                const PruneConfig& cfg, int m, int threads) {
    if (m < 1) throw std::invalid_argument("curate_dataset: need at least one sample");
    SyntheticDataset ds;
    ds.images.resize(static_cast<size_t>(m));
    ds.provenance.resize(static_cast<size_t>(m));
    util::parallel_for(m, threads, [&](int64_t i) {
        Sample s = sample_one(gen_t, gen_s, cfg, Rng::derive(cfg.rng_seed, static_cast<uint64_t>(i)));
        ds.images[static_cast<size_t>(i)] = std::move(s.image);
        ds.provenance[static_cast<size_t>(i)] = std::move(s.provenance);
    });
    return ds;
}

namespace {

std::string join_layers(const std::vector<int>& layers) {
    if (layers.empty()) return "-";
    std::ostringstream os;
    for (size_t i = 0; i < layers.size(); ++i) {
        if (i) os << ';';
        os << layers[i];
    }
    return os.str();
}

std::vector<int> split_layers(const std::string& s) {
    std::vector<int> out;
    if (s == "-" || s.empty()) return out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';')) out.push_back(std::stoi(tok));
    return out;
}

std::string sample_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.pfm", index);
    return std::string(buf);
}

}  // namespace

void save_dataset(const SyntheticDataset& ds, const std::string& dir,
                  const std::string& gen_t_hash, const std::string& gen_s_hash) {
    fs::create_directories(dir);
    util::CsvWriter prov({"index", "seed", "strategy", "p", "gated_layers"});
    for (size_t i = 0; i < ds.images.size(); ++i) {
        util::write_pfm(dir + "/" + sample_name(static_cast<int>(i)), ds.images[i]);
        const SampleProvenance& pr = ds.provenance[i];
        prov.add_row({std::to_string(i), std::to_string(pr.seed), to_string(pr.strategy),
                      util::format_double(pr.p, 4), join_layers(pr.gated_layers)});
    }
    prov.save(dir + "/provenance.csv");
    nn::Manifest m;
    m["count"] = std::to_string(ds.images.size());
    m["gen_t_hash"] = gen_t_hash;
    m["gen_s_hash"] = gen_s_hash;
    nn::save_manifest(m, dir + "/images.manifest");
}

SyntheticDataset load_dataset(const std::string& dir) {
    util::CsvTable prov = util::read_csv(dir + "/provenance.csv");
    SyntheticDataset ds;
    for (const auto& row : prov.rows) {
        int index = std::stoi(row[0]);
        ds.images.push_back(util::read_pfm(dir + "/" + sample_name(index)));
        SampleProvenance pr;
        pr.seed = std::stoull(row[1]);
        pr.strategy = prune_strategy_from_string(row[2]);
        pr.p = std::stod(row[3]);
        pr.gated_layers = split_layers(row[4]);
        ds.provenance.push_back(std::move(pr));
    }
    return ds;
}

}  // namespace genaug::augsample
