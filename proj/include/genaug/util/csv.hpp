#pragma once

#include <string>
#include <vector>

namespace genaug::util {

// Minimal CSV support for the artifact's own files (no quoting/escaping:
// every field the pipeline writes is a plain token or number).
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row);
    void save(const std::string& path) const;
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
std::string format_double(double v, int precision = 6);

}  // namespace genaug::util
