#include "spadesim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spadesim/common.hpp"

namespace spadesim::io {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

uint64_t fnv1a(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw InputError("table: no columns");
}

void Table::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

void Table::add_row(std::vector<std::string> values) {
    if (values.size() != columns_.size())
        throw InputError("table: row width does not match header");
    rows_.push_back(std::move(values));
}

size_t Table::column_index(const std::string& column) const {
    for (size_t c = 0; c < columns_.size(); ++c)
        if (columns_[c] == column) return c;
    throw InputError("table: unknown column '" + column + "'");
}

double Table::at(size_t row, const std::string& column) const {
    return std::stod(rows_.at(row).at(column_index(column)));
}

const std::string& Table::cell(size_t row, const std::string& column) const {
    return rows_.at(row).at(column_index(column));
}

std::string Table::to_csv() const {
    std::ostringstream out;
    for (size_t c = 0; c < columns_.size(); ++c)
        out << (c ? "," : "") << columns_[c];
    out << '\n';
    for (const auto& row : rows_) {
        for (size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << '\n';
    }
    return out.str();
}

void Table::write_csv(const std::string& path) const { write_text(path, to_csv()); }

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (ch != '\r') {
            cell += ch;
        }
    }
    cells.push_back(cell);
    return cells;
}
} // namespace

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty CSV '" + path + "'");
    Table t(split_csv_line(line));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.add_row(split_csv_line(line));
    }
    return t;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace spadesim::io
