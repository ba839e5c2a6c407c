#ifndef SPADESIM_IO_HPP
#define SPADESIM_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace spadesim::io {

// shortest round-trip decimal representation; deterministic across runs
std::string format_double(double v);

uint64_t fnv1a(std::string_view data);

// Column table with deterministic CSV formatting.  Cells are stored as the
// strings that will be written, so a table round-trips byte-identically.
class Table {
public:
    explicit Table(std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> values);
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    size_t row_count() const { return rows_.size(); }
    double at(size_t row, const std::string& column) const;
    const std::string& cell(size_t row, const std::string& column) const;
    std::string to_csv() const;
    void write_csv(const std::string& path) const;

private:
    size_t column_index(const std::string& column) const;

    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

Table read_csv(const std::string& path);

nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace spadesim::io

#endif
