#include "genaug/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "genaug/util/csv.hpp"
#include "genaug/util/image_io.hpp"

namespace genaug::cli {

const ResultTable::Cell& ResultTable::at(const std::string& attribute, const std::string& method,
                                         size_t column) const {
    return cells.at(attribute).at(method).at(column);
}

ResultTable build_table(const std::vector<ResultRow>& rows, const std::vector<std::string>& methods,
                        const std::vector<std::string>& attributes,
                        const std::vector<std::string>& domains) {
    ResultTable t;
    t.methods = methods;
    t.attributes = attributes;
    t.domains = domains;

    auto round_trip = [](double v) { return std::stod(util::format_double(v, 9)); };

    for (const auto& attr : attributes) {
        for (const auto& method : methods) {
            std::vector<ResultTable::Cell> line(domains.size() + 1);
            for (size_t d = 0; d < domains.size(); ++d) {
                std::vector<double> vals;
                for (const auto& r : rows)
                    if (r.method == method && r.attribute == attr && r.domain == domains[d])
                        vals.push_back(r.accuracy);
                if (vals.empty()) continue;
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                double var = 0.0;
                for (double v : vals) var += (v - mean) * (v - mean);
                var /= static_cast<double>(vals.size());
                line[d].mean = round_trip(mean);
                line[d].spread = round_trip(std::sqrt(var));
                line[d].count = static_cast<int>(vals.size());
            }
            // Average column: mean of the stored (already rounded) domain means.
            ResultTable::Cell avg;
            double sum = 0.0, spread_sum = 0.0;
            int present = 0;
            for (size_t d = 0; d < domains.size(); ++d) {
                if (line[d].count == 0) continue;
                sum += line[d].mean;
                spread_sum += line[d].spread;
                ++present;
            }
            if (present > 0) {
                avg.mean = round_trip(sum / present);
                avg.spread = round_trip(spread_sum / present);
                avg.count = present;
            }
            line.back() = avg;
            t.cells[attr][method] = std::move(line);
        }
    }
    return t;
}

namespace {

// Rank of each method in one column, best (highest mean) first.
std::vector<std::string> column_ranking(const ResultTable& t, const std::string& attr,
                                        size_t column) {
    std::vector<std::string> methods;
    for (const auto& m : t.methods)
        if (t.cells.at(attr).at(m).at(column).count > 0) methods.push_back(m);
    std::stable_sort(methods.begin(), methods.end(), [&](const std::string& a, const std::string& b) {
        return t.at(attr, a, column).mean > t.at(attr, b, column).mean;
    });
    return methods;
}

void write_csv(const ResultTable& t, const std::string& path) {
    std::vector<std::string> header = {"attribute", "method"};
    for (const auto& d : t.domains) header.push_back(d + "_mean");
    header.push_back("average_mean");
    for (const auto& d : t.domains) header.push_back(d + "_spread");
    header.push_back("average_spread");
    util::CsvWriter csv(header);
    for (const auto& attr : t.attributes) {
        for (const auto& method : t.methods) {
            const auto& line = t.cells.at(attr).at(method);
            std::vector<std::string> row = {attr, method};
            for (const auto& cell : line) row.push_back(util::format_double(cell.mean, 9));
            for (const auto& cell : line) row.push_back(util::format_double(cell.spread, 9));
            csv.add_row(std::move(row));
        }
    }
    csv.save(path);
}

void write_markdown(const ResultTable& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("report: cannot open " + path);
    f << "# Results\n\n";
    f << "Accuracy (%), mean over seeds with spread in parentheses. Best method per column in "
         "bold, runner-up underlined.\n";
    size_t n_cols = t.domains.size() + 1;
    for (const auto& attr : t.attributes) {
        f << "\n## Attribute: " << attr << "\n\n";
        f << "| Method |";
        for (const auto& d : t.domains) f << " Domain " << d << " |";
        f << " Average |\n";
        f << "|---|";
        for (size_t i = 0; i < n_cols; ++i) f << "---|";
        f << "\n";
        std::vector<std::vector<std::string>> rankings;
        for (size_t c = 0; c < n_cols; ++c) rankings.push_back(column_ranking(t, attr, c));
        for (const auto& method : t.methods) {
            f << "| " << method << " |";
            const auto& line = t.cells.at(attr).at(method);
            for (size_t c = 0; c < n_cols; ++c) {
                const auto& cell = line[c];
                if (cell.count == 0) {
                    f << " - |";
                    continue;
                }
                std::string text = util::format_double(cell.mean, 9) + " (±" +
                                   util::format_double(cell.spread, 9) + ")";
                const auto& rank = rankings[c];
                if (!rank.empty() && rank[0] == method)
                    text = "**" + text + "**";
                else if (rank.size() > 1 && rank[1] == method)
                    text = "<u>" + text + "</u>";
                f << " " << text << " |";
            }
            f << "\n";
        }
    }
}

}  // namespace

void write_table(const ResultTable& table, ReportFormat format, const std::string& path) {
    if (format == ReportFormat::kCsv)
        write_csv(table, path);
    else
        write_markdown(table, path);
}

std::vector<std::string> write_sample_grids(Pipeline& pipeline, const std::string& out_dir) {
    const ExperimentConfig& cfg = pipeline.config();
    std::vector<std::string> written;
    bool any_synth = std::any_of(cfg.methods.begin(), cfg.methods.end(), Pipeline::is_synth_method);
    if (!any_synth || cfg.seeds.empty()) return written;

    uint64_t seed = cfg.seeds.front();
    const int per_strategy = 3;
    for (const auto& domain : cfg.domains) {
        std::vector<nn::Tensor> tiles;
        std::string ft_dir = pipeline.ensure_finetuned(domain, seed);
        tiles.push_back(util::read_pfm(ft_dir + "/target.pfm"));
        for (const char* method : {"synth-base", "synth-prune-zero", "synth-prune-rewind"}) {
            if (std::find(cfg.methods.begin(), cfg.methods.end(), method) == cfg.methods.end())
                continue;
            augsample::SyntheticDataset ds = pipeline.curated(domain, seed, method);
            for (int i = 0; i < per_strategy && i < static_cast<int>(ds.images.size()); ++i)
                tiles.push_back(ds.images[static_cast<size_t>(i)]);
        }
        nn::Tensor grid = util::tile_images(tiles, static_cast<int>(tiles.size()));
        std::string path = out_dir + "/samples_domain_" + domain + ".ppm";
        util::write_ppm(path, grid);
        written.push_back(path);
    }
    return written;
}

}  // namespace genaug::cli
