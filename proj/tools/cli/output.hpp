#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pnewton/solvers.hpp"

namespace pnewton::cli {

/// Shortest round-trip decimal; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

/// Comma-separated rows with '\n' endings. Remembers whether any NaN was written.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(long v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(bool v);
    CsvWriter& cell(const std::string& v);
    CsvWriter& cell(const char* v) { return cell(std::string(v)); }
    void end_row();

    bool saw_nan() const { return saw_nan_; }
    std::size_t columns() const { return columns_; }

private:
    void separator();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
    bool saw_nan_ = false;
};

/// Columns of trace.csv, in order.
const std::vector<std::string>& trace_columns();

/// Writes one row per IterationRecord. Returns true when a NaN was emitted.
bool write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace);

/// Creates <out>/<UTC timestamp>-<command>, adding a numeric suffix on collision.
std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command);

/// Common environment entries for meta.json.
nlohmann::json environment_meta();

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace pnewton::cli
