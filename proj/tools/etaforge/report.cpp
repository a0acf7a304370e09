#include "report.hpp"

#include "etaforge/errors.hpp"

#include <cstdio>
#include <fstream>

namespace etaforge::cli {

std::string format_sig(double x) {
    if (x == 0.0) x = 0.0; // collapse -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw IoError("csv row for " + name + " has " + std::to_string(cells.size()) +
                      " cells, table declares " + std::to_string(columns.size()) +
                      " columns");
    rows.push_back(std::move(cells));
}

void push_complex(std::vector<std::string>& cells, Complex z) {
    cells.push_back(format_sig(z.real()));
    cells.push_back(format_sig(z.imag()));
}

bool ExitReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

const CheckRow* ExitReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.pass) return &c;
    return nullptr;
}

namespace {

std::string join_csv(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

std::string sanitize_cell(std::string s) {
    for (char& c : s)
        if (c == '|' || c == '\n') c = '/';
    return s;
}

} // namespace

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    if (table.columns.empty() || table.rows.empty())
        throw IoError("refusing to write an empty result table to " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << join_csv(table.columns);
    for (const auto& row : table.rows) out << join_csv(row);
    if (!out) throw IoError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (text.empty()) throw IoError("refusing to write an empty report to " + path.string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string render_markdown(const std::string& scenario,
                            const std::vector<std::string>& preamble,
                            const std::vector<CheckRow>& checks) {
    std::string md = "# eta-forge — " + scenario + "\n\n";
    for (const auto& line : preamble) md += "- " + line + "\n";
    if (!preamble.empty()) md += "\n";

    md += "| check | formula | status | detail |\n";
    md += "|---|---|---|---|\n";
    std::size_t passed = 0;
    for (const auto& c : checks) {
        md += "| " + sanitize_cell(c.id) + " | " + sanitize_cell(c.formula) + " | " +
              (c.pass ? "pass" : "FAIL") + " | " + sanitize_cell(c.detail) + " |\n";
        if (c.pass) ++passed;
    }
    md += "\n" + std::to_string(passed) + "/" + std::to_string(checks.size()) +
          " checks passed.\n";
    for (const auto& c : checks) {
        if (!c.pass) {
            md += "\nFirst failure: " + sanitize_cell(c.id) + " — " +
                  sanitize_cell(c.detail) + "\n";
            break;
        }
    }
    return md;
}

} // namespace etaforge::cli
