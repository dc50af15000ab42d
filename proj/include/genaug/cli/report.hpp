#pragma once

#include <map>
#include <string>
#include <vector>

#include "genaug/cli/pipeline.hpp"

namespace genaug::cli {

// Aggregated results: per attribute a methods x (domains + average) block of
// mean-over-seeds accuracies with their spread.
struct ResultTable {
    struct Cell {
        double mean = 0.0;
        double spread = 0.0;  // population standard deviation over seeds
        int count = 0;
    };

    std::vector<std::string> methods;
    std::vector<std::string> attributes;
    std::vector<std::string> domains;  // without the average column

    // cells[attribute][method] has domains.size() + 1 entries, average last.
    std::map<std::string, std::map<std::string, std::vector<Cell>>> cells;

    const Cell& at(const std::string& attribute, const std::string& method, size_t column) const;
};

ResultTable build_table(const std::vector<ResultRow>& rows, const std::vector<std::string>& methods,
                        const std::vector<std::string>& attributes,
                        const std::vector<std::string>& domains);

enum class ReportFormat { kCsv, kMarkdown };

// Table emission. Markdown marks the best method per column in bold and the
// runner-up underlined, per attribute block.
void write_table(const ResultTable& table, ReportFormat format, const std::string& path);

// Per-domain grid: single-shot target plus sample strips per strategy,
// written as PPM next to the tables. Needs the pipeline's artifacts; domains
// without fine-tuned generators are skipped.
std::vector<std::string> write_sample_grids(Pipeline& pipeline, const std::string& out_dir);

}  // namespace genaug::cli
