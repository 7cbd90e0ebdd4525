#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace carleman_lab {

using json = nlohmann::json;

// 17 significant digits, '.' decimal, independent of the locale
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

class CsvTable {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw ConfigError("csv row has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(columns_.size()));
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    std::string str() const {
        std::string out;
        for (std::size_t c = 0; c < columns_.size(); ++c) out += (c ? "," : "") + columns_[c];
        out += '\n';
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                if (auto d = std::get_if<double>(&row[c]))
                    out += format_double(*d);
                else if (auto i = std::get_if<long long>(&row[c]))
                    out += std::to_string(*i);
                else
                    out += std::get<std::string>(row[c]);
            }
            out += '\n';
        }
        return out;
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + path.string());
        f << str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// UTC timestamp, kept in a single report field
inline std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

// non-finite doubles become strings so the JSON stays valid
inline json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

inline json json_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

} // namespace carleman_lab
