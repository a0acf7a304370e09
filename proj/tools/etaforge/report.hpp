#pragma once

#include "etaforge/linalg.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace etaforge::cli {

// 17 significant digits — enough to round-trip an IEEE double exactly.
std::string format_sig(double x);

struct CsvTable {
    std::string name; // file basename, without extension
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
};

// Appends the re/im column pair for a complex value.
void push_complex(std::vector<std::string>& cells, Complex z);

struct CheckRow {
    std::string id;      // stable identifier, usable as a script hook
    std::string formula; // what was verified, spelled out
    bool pass = false;
    std::string detail;  // measured values
};

struct ExitReport {
    int exit_code = 0;
    std::string scenario;
    std::vector<CheckRow> checks;
    std::vector<std::filesystem::path> files;
    std::string summary_text;

    bool all_passed() const;
    const CheckRow* first_failure() const;
};

// Both writers throw IoError: on an unwritable path, and for a CSV with no
// columns or no rows (an empty result set is a bug upstream, not a report).
void write_csv(const std::filesystem::path& path, const CsvTable& table);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string render_markdown(const std::string& scenario,
                            const std::vector<std::string>& preamble,
                            const std::vector<CheckRow>& checks);

} // namespace etaforge::cli
