#include "output.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>

namespace pnewton::cli {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size())
{
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (const auto& h : header) cell(h);
    end_row();
}

void CsvWriter::separator()
{
    if (in_row_ > 0) out_ << ',';
    ++in_row_;
}

CsvWriter& CsvWriter::cell(double v)
{
    separator();
    if (std::isnan(v)) saw_nan_ = true;
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::cell(long long v)
{
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::cell(bool v)
{
    separator();
    out_ << (v ? 1 : 0);
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v)
{
    separator();
    out_ << v;
    return *this;
}

void CsvWriter::end_row()
{
    if (in_row_ != columns_) throw std::logic_error("CsvWriter: row has the wrong number of cells");
    out_ << '\n';
    in_row_ = 0;
}

const std::vector<std::string>& trace_columns()
{
    static const std::vector<std::string> cols = {
        "k",      "f",     "grad_norm", "pgrad_norm", "stationarity", "step_norm", "tau",
        "sigma",  "lambda", "rho",      "L",          "decrease_target", "accepted", "fallback",
        "hard_case", "backtracks", "L_doublings", "matvecs", "x_norm"};
    return cols;
}

bool write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace)
{
    CsvWriter w(path, trace_columns());
    for (const auto& r : trace.records) {
        w.cell(r.k)
            .cell(r.f)
            .cell(r.grad_norm)
            .cell(r.pgrad_norm)
            .cell(r.stationarity)
            .cell(r.step_norm)
            .cell(r.tau)
            .cell(r.sigma)
            .cell(r.lambda)
            .cell(r.rho)
            .cell(r.L)
            .cell(r.decrease_target)
            .cell(r.accepted)
            .cell(r.fallback)
            .cell(r.hard_case)
            .cell(r.backtracks)
            .cell(r.L_doublings)
            .cell(static_cast<long long>(r.matvecs))
            .cell(r.x.size() > 0 ? r.x.norm() : kNaN);
        w.end_row();
    }
    return w.saw_nan();
}

std::filesystem::path make_run_dir(const std::filesystem::path& out, const std::string& command)
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> stamp{};
    std::strftime(stamp.data(), stamp.size(), "%Y%m%dT%H%M%SZ", &tm);
    const std::string base = std::string(stamp.data()) + "-" + command;
    std::filesystem::create_directories(out);
    for (int i = 0;; ++i) {
        const std::filesystem::path dir = out / (i == 0 ? base : base + "-" + std::to_string(i));
        if (std::filesystem::create_directory(dir)) return dir;
    }
}

nlohmann::json environment_meta()
{
    nlohmann::json j;
    j["pnewton.version"] = "0.1.0";
#if defined(__clang__)
    j["env.compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    j["env.compiler"] = std::string("gcc ") + __VERSION__;
#else
    j["env.compiler"] = "unknown";
#endif
#if defined(__linux__)
    j["env.platform"] = "linux";
#elif defined(__APPLE__)
    j["env.platform"] = "macos";
#else
    j["env.platform"] = "other";
#endif
    j["env.eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION);
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> stamp{};
    std::strftime(stamp.data(), stamp.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["env.timestamp"] = std::string(stamp.data());
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace pnewton::cli
