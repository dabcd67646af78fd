#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pnewton/reference.hpp"
#include "pnewton/solvers.hpp"

namespace pnewton::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProblemSpec {
    std::string kind = "poly1d";  ///< poly1d | quadratic | logistic | matfact
    int p = 4;
    long n = 10;
    long r = 5;
    double cond = 1.0;
    std::string data;
    double l2 = 0.0;
    std::vector<double> x0;
    double x0_scale = 1.0;
};

struct ReferenceSpec {
    KernelKind kernel = KernelKind::Cosh;
    Structure structure = Structure::Isotropic;
    /// nullopt means "auto": the norm of the gradient at x0.
    std::optional<double> scale = 1.0;
};

struct AlgorithmSpec {
    std::string name = "pn";  ///< pg | newton | pn | globalized | regularized | adaptive
    double gamma = 0.5;
    GlobalizedConfig globalized;
    double sigma = 1.0;
    AdaptiveConfig adaptive;
    LinearSolveOptions linear;
};

struct RunConfig {
    ProblemSpec problem;
    ReferenceSpec reference;
    AlgorithmSpec algorithm;
    StoppingCriteria stopping;
    std::uint64_t seed = 0;
    std::string out = "runs";
};

/// Parses the TOML schema documented in docs/config.md. Unknown keys are errors.
RunConfig parse_config(const std::string& toml_text, const std::string& source_name = "config");
RunConfig load_config(const std::string& path);

/// Flag-style overrides; values are validated on application.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> eps;
    std::optional<int> max_iters;
    std::optional<std::string> kernel;
    std::optional<std::string> scale;
    std::optional<std::string> algo;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);
void validate(const RunConfig& cfg);

KernelKind parse_kernel_or_throw(const std::string& name);
/// "auto" or a positive number.
std::optional<double> parse_scale_or_throw(const std::string& text);

/// Flat echo of the configuration (dotted keys) for run metadata.
nlohmann::json describe(const RunConfig& cfg);

}  // namespace pnewton::cli
