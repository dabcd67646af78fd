#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "pnewton/problems.hpp"

namespace pnewton {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\r';
}

template <class T>
bool parse_whole(std::string_view tok, T& out)
{
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    if (tok.empty()) return false;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

LogisticProblem parse_libsvm(std::istream& in, double l2)
{
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<int> labels;
    std::vector<std::pair<long long, double>> row;
    long long max_index = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view rest(line);
        if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < rest.size()) {
            while (i < rest.size() && is_space(rest[i])) ++i;
            const std::size_t start = i;
            while (i < rest.size() && !is_space(rest[i])) ++i;
            if (i > start) tokens.push_back(rest.substr(start, i - start));
        }
        if (tokens.empty()) continue;

        double label = 0.0;
        if (!parse_whole(tokens[0], label)) {
            throw ParseError(lineno, "malformed label '" + std::string(tokens[0]) + "'");
        }
        int y = 0;
        if (label == 1.0) {
            y = 1;
        } else if (label == 0.0 || label == -1.0) {
            y = -1;
        } else {
            throw ParseError(lineno, "label '" + std::string(tokens[0]) + "' is not binary");
        }

        row.clear();
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const std::string_view tok = tokens[t];
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) {
                throw ParseError(lineno, "token '" + std::string(tok) + "' is not index:value");
            }
            const std::string_view idx_tok = tok.substr(0, colon);
            long long idx = 0;
            if (idx_tok.empty() || idx_tok.front() == '+' || idx_tok.front() == '-' || !parse_whole(idx_tok, idx) ||
                idx <= 0) {
                throw ParseError(lineno, "index '" + std::string(idx_tok) + "' is not a positive integer");
            }
            double value = 0.0;
            if (!parse_whole(tok.substr(colon + 1), value) || !std::isfinite(value)) {
                throw ParseError(lineno, "value in '" + std::string(tok) + "' is not a finite number");
            }
            row.emplace_back(idx, value);
        }
        std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t t = 1; t < row.size(); ++t) {
            if (row[t].first == row[t - 1].first) {
                throw ParseError(lineno, "duplicate index " + std::to_string(row[t].first));
            }
        }
        const auto sample = static_cast<int>(labels.size());
        for (const auto& [idx, value] : row) {
            triplets.emplace_back(sample, static_cast<int>(idx - 1), value);
            max_index = std::max(max_index, idx);
        }
        labels.push_back(y);
    }
    if (labels.empty()) throw ParseError(lineno, "no samples");
    if (max_index == 0) throw ParseError(lineno, "no features");

    SparseRowMatrix X(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(max_index));
    X.setFromTriplets(triplets.begin(), triplets.end());
    return LogisticProblem(std::move(X), std::move(labels), l2);
}

LogisticProblem load_libsvm(const std::string& path, double l2)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open LIBSVM file '" + path + "'");
    return parse_libsvm(in, l2);
}

void write_libsvm(std::ostream& out, const LogisticProblem& prob)
{
    const SparseRowMatrix& X = prob.features();
    std::array<char, 64> buf{};
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out << (prob.labels()[static_cast<std::size_t>(i)] > 0 ? "+1" : "-1");
        for (SparseRowMatrix::InnerIterator it(X, i); it; ++it) {
            const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), it.value());
            out << ' ' << (it.col() + 1) << ':' << std::string_view(buf.data(), res.ptr - buf.data());
        }
        out << '\n';
    }
}

}  // namespace pnewton
