#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dime/matrix.hpp"

// Output plumbing for the CLI: typed table cells rendered to CSV or
// JSON-lines with shortest-round-trip float formatting, atomic file writes,
// and the CSV data-matrix reader.
namespace dime::io {

enum class Format { csv, jsonl };

Format format_from_string(const std::string& name);  // "csv" | "jsonl"
std::string to_string(Format format);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

struct Cell {
    enum class Kind { integer, real, text } kind;
    std::string text;  // already formatted
};

Cell cell(std::uint64_t v);
Cell cell(double v);
Cell cell(const std::string& v);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string render(const Table& table, Format format);

// Write via temp file + rename so readers never observe a partial file.
void atomic_write_text(const std::string& path, const std::string& content);

// Fail fast (IoError) if `path` cannot be created, before any computation.
void ensure_writable(const std::string& path);

// Plain numeric CSV, one sample per line, no header. Unreadable file ->
// IoError; malformed content -> ValidationError.
DataMatrix read_data_matrix(const std::string& path);

}  // namespace dime::io
