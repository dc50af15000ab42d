#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "genaug/cli/config.hpp"
#include "genaug/cli/pipeline.hpp"
#include "genaug/cli/report.hpp"

using namespace genaug;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string artifacts;
    int threads = -1;
};

cli::ExperimentConfig resolve_config(const CommonArgs& args) {
    cli::ExperimentConfig cfg =
        args.config_path.empty() ? cli::default_config() : cli::load_config(args.config_path);
    for (const auto& o : args.overrides) cli::apply_override(cfg, o);
    if (!args.artifacts.empty()) cfg.artifact_root = args.artifacts;
    if (args.threads >= 0) cfg.threads = args.threads;
    cli::validate(cfg);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Experiment config (JSON)");
    cmd->add_option("--override", args.overrides, "key=value config override (repeatable)");
    cmd->add_option("--artifacts", args.artifacts, "Artifact root directory");
    cmd->add_option("--threads", args.threads, "Worker threads (0 = hardware)");
}

void emit_report(cli::Pipeline& pipeline, const std::vector<cli::ResultRow>& rows) {
    const cli::ExperimentConfig& cfg = pipeline.config();
    cli::ResultTable table = cli::build_table(rows, cfg.methods, cfg.attributes, cfg.domains);
    std::string dir = pipeline.results_dir();
    cli::write_table(table, cli::ReportFormat::kCsv, dir + "/report.csv");
    cli::write_table(table, cli::ReportFormat::kMarkdown, dir + "/report.md");
    std::vector<std::string> grids = cli::write_sample_grids(pipeline, dir);
    std::cout << "report: " << dir << "/report.md\n";
    for (const auto& g : grids) std::cout << "grid: " << g << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-shot target-aware generative augmentation pipeline"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* gen_data = app.add_subcommand("gen-data", "Build the toy dataset and shifted targets");
    add_common(gen_data, args);

    auto* train_gan = app.add_subcommand("train-gan", "Train the source GAN");
    add_common(train_gan, args);

    std::string attribute, domain, method = "synth-base";
    uint64_t seed = 0;

    auto* train_clf = app.add_subcommand("train-clf", "Train a source classifier");
    add_common(train_clf, args);
    train_clf->add_option("--attribute", attribute, "Attribute task")->required();
    train_clf->add_option("--seed", seed, "Experiment seed");

    auto* finetune = app.add_subcommand("finetune", "Invert and fine-tune for one target");
    add_common(finetune, args);
    finetune->add_option("--domain", domain, "Target domain (A/B/C)")->required();
    finetune->add_option("--seed", seed, "Experiment seed");

    auto* curate = app.add_subcommand("curate", "Sample a synthetic target dataset");
    add_common(curate, args);
    curate->add_option("--domain", domain, "Target domain (A/B/C)")->required();
    curate->add_option("--seed", seed, "Experiment seed");
    curate->add_option("--method", method, "synth-base|synth-prune-zero|synth-prune-rewind");

    auto* adapt = app.add_subcommand("adapt", "Adapt and evaluate one grid cell");
    add_common(adapt, args);
    adapt->add_option("--domain", domain, "Target domain (A/B/C)")->required();
    adapt->add_option("--attribute", attribute, "Attribute task")->required();
    adapt->add_option("--method", method, "Adaptation method")->required();
    adapt->add_option("--seed", seed, "Experiment seed");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate one grid cell (alias of adapt)");
    add_common(evaluate, args);
    evaluate->add_option("--domain", domain, "Target domain (A/B/C)")->required();
    evaluate->add_option("--attribute", attribute, "Attribute task")->required();
    evaluate->add_option("--method", method, "Method (default source-only)");
    evaluate->add_option("--seed", seed, "Experiment seed");

    auto* run_all = app.add_subcommand("run-all", "Run the full pipeline grid");
    add_common(run_all, args);

    auto* report = app.add_subcommand("report", "Aggregate results.csv into report tables");
    add_common(report, args);

    CLI11_PARSE(app, argc, argv);

    try {
        cli::ExperimentConfig cfg = resolve_config(args);
        cli::Pipeline pipeline(cfg);

        if (gen_data->parsed()) {
            std::cout << "dataset: " << pipeline.ensure_dataset() << "\n";
            for (const auto& d : cfg.domains)
                std::cout << "shifted " << d << ": " << pipeline.ensure_shifted(d) << "\n";
        } else if (train_gan->parsed()) {
            std::cout << "gan: " << pipeline.ensure_gan() << "\n";
        } else if (train_clf->parsed()) {
            std::cout << "classifier: " << pipeline.ensure_classifier(attribute, seed) << "\n";
        } else if (finetune->parsed()) {
            std::cout << "finetune: " << pipeline.ensure_finetuned(domain, seed) << "\n";
        } else if (curate->parsed()) {
            std::cout << "curated: " << pipeline.ensure_curated(domain, seed, method) << "\n";
        } else if (adapt->parsed()) {
            cli::ResultRow row = pipeline.ensure_cell(domain, attribute, seed, method);
            std::printf("%s %s domain %s seed %llu: accuracy %.4f\n", row.method.c_str(),
                        row.attribute.c_str(), row.domain.c_str(),
                        static_cast<unsigned long long>(row.seed), row.accuracy);
        } else if (evaluate->parsed()) {
            std::string m = evaluate->count("--method") ? method : "source-only";
            cli::ResultRow row = pipeline.ensure_cell(domain, attribute, seed, m);
            std::printf("%s %s domain %s seed %llu: accuracy %.4f\n", row.method.c_str(),
                        row.attribute.c_str(), row.domain.c_str(),
                        static_cast<unsigned long long>(row.seed), row.accuracy);
        } else if (run_all->parsed()) {
            std::vector<cli::ResultRow> rows = pipeline.run_all();
            std::cout << "results: " << pipeline.results_dir() << "/results.csv\n";
            emit_report(pipeline, rows);
        } else if (report->parsed()) {
            std::string csv = pipeline.results_dir() + "/results.csv";
            std::vector<cli::ResultRow> rows = cli::read_results_csv(csv);
            emit_report(pipeline, rows);
        }
        return 0;
    } catch (const cli::StageError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
