#include "table_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dime/error.hpp"

namespace dime::io {

Format format_from_string(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "jsonl") return Format::jsonl;
    throw ValidationError("--format must be csv or jsonl (got '" + name + "')");
}

std::string to_string(Format format) { return format == Format::csv ? "csv" : "jsonl"; }

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Cell cell(std::uint64_t v) { return {Cell::Kind::integer, std::to_string(v)}; }
Cell cell(double v) { return {Cell::Kind::real, format_double(v)}; }
Cell cell(const std::string& v) { return {Cell::Kind::text, v}; }

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string render(const Table& table, Format format) {
    std::string out;
    if (format == Format::csv) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out.push_back(',');
            out += table.columns[c];
        }
        out.push_back('\n');
        for (const auto& row : table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out.push_back(',');
                out += row[c].text;
            }
            out.push_back('\n');
        }
    } else {
        for (const auto& row : table.rows) {
            out.push_back('{');
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out.push_back(',');
                out.push_back('"');
                out += json_escape(table.columns[c]);
                out += "\":";
                if (row[c].kind == Cell::Kind::text) {
                    out.push_back('"');
                    out += json_escape(row[c].text);
                    out.push_back('"');
                } else {
                    out += row[c].text;
                }
            }
            out += "}\n";
        }
    }
    return out;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write to '" + tmp + "'");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f.flush()) throw IoError("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

void ensure_writable(const std::string& path) {
    const std::string probe = path + ".tmp";
    {
        std::ofstream f(probe, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("output path '" + path + "' is not writable");
    }
    std::error_code ec;
    std::filesystem::remove(probe, ec);
}

DataMatrix read_data_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read input file '" + path + "'");
    std::vector<double> values;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t line_cols = 0;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc())
                throw ValidationError("'" + path + "' line " + std::to_string(rows + 1) +
                                      ": not a number");
            p = res.ptr;
            values.push_back(v);
            ++line_cols;
            while (p < end && *p == ' ') ++p;
            if (p < end) {
                if (*p != ',')
                    throw ValidationError("'" + path + "' line " +
                                          std::to_string(rows + 1) +
                                          ": expected comma separator");
                ++p;
            }
        }
        if (line_cols == 0)
            throw ValidationError("'" + path + "' line " + std::to_string(rows + 1) +
                                  ": empty row");
        if (rows == 0) {
            cols = line_cols;
        } else if (line_cols != cols) {
            throw ValidationError("'" + path + "' line " + std::to_string(rows + 1) +
                                  ": expected " + std::to_string(cols) +
                                  " columns, got " + std::to_string(line_cols));
        }
        ++rows;
    }
    if (rows == 0) throw ValidationError("'" + path + "' contains no data");
    return DataMatrix(rows, cols, std::move(values));
}

}  // namespace dime::io
