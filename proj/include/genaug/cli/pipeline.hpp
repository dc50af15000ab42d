#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "genaug/augsample/augsample.hpp"
#include "genaug/cli/config.hpp"
#include "genaug/sfda/sfda.hpp"
#include "genaug/shifts/shifts.hpp"
#include "genaug/stylegen/checkpoint.hpp"

namespace genaug::cli {

struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage " + stage + " failed: " + what), stage_name(stage) {}
    std::string stage_name;
};

struct ResultRow {
    std::string method;
    std::string attribute;
    std::string domain;
    uint64_t seed = 0;
    double accuracy = 0.0;
};

// Stage graph with content-addressed caching. Every stage writes into
// <artifact_root>/<stage>/<hash>/ with a .done marker and a human-readable
// symlink alias; a completed stage is loaded instead of recomputed, and an
// incomplete directory (no marker) is discarded and rebuilt.
class Pipeline {
public:
    explicit Pipeline(ExperimentConfig cfg);

    const ExperimentConfig& config() const { return cfg_; }
    int threads() const { return threads_; }

    // Stage builders; each returns the stage directory.
    std::string ensure_dataset();
    std::string ensure_shifted(const std::string& domain);
    std::string ensure_gan();
    std::string ensure_classifier(const std::string& attribute, uint64_t seed);
    std::string ensure_finetuned(const std::string& domain, uint64_t seed);
    std::string ensure_curated(const std::string& domain, uint64_t seed, const std::string& method);

    ResultRow ensure_cell(const std::string& domain, const std::string& attribute, uint64_t seed,
                          const std::string& method);

    // Full grid; writes results.csv and returns the sorted rows.
    std::vector<ResultRow> run_all();
    std::string results_dir();

    // Loaded artifact accessors (RAM-cached, built on demand).
    const shifts::LabeledDataset& dataset();
    const shifts::LabeledDataset& shifted_target(const std::string& domain);
    const sfda::ClassifierModel& classifier(const std::string& attribute, uint64_t seed);
    const stylegen::GeneratorModel& source_generator();
    const stylegen::DiscriminatorModel& source_discriminator();
    const stylegen::GeneratorModel& finetuned_generator(const std::string& domain, uint64_t seed);
    augsample::SyntheticDataset curated(const std::string& domain, uint64_t seed,
                                        const std::string& method);

    int target_image_index(const std::string& domain, uint64_t seed) const;
    shifts::DomainShiftSpec shift_spec(const std::string& domain) const;

    static augsample::PruneStrategy method_strategy(const std::string& method);
    static bool is_synth_method(const std::string& method);

private:
    using StageFn = std::function<void(const std::string& dir)>;
    std::string run_stage(const std::string& stage, const std::string& alias,
                          const std::string& key_material, const StageFn& build);

    std::string dataset_key_material() const;
    augsample::PruneConfig prune_config(const std::string& method, const std::string& domain,
                                        uint64_t seed) const;

    ExperimentConfig cfg_;
    int threads_;

    std::mutex mu_;
    std::unique_ptr<shifts::LabeledDataset> dataset_;
    std::map<std::string, std::unique_ptr<shifts::LabeledDataset>> shifted_;
    std::map<std::string, std::unique_ptr<sfda::ClassifierModel>> classifiers_;
    std::unique_ptr<stylegen::GeneratorModel> gen_s_;
    std::unique_ptr<stylegen::DiscriminatorModel> disc_s_;
    std::map<std::string, std::unique_ptr<stylegen::GeneratorModel>> gen_t_;
};

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_results_csv(const std::string& path);

}  // namespace genaug::cli
