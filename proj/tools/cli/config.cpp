#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml++/toml.hpp>

namespace pnewton::cli {

namespace {

const std::set<std::string> kAlgorithms = {"pg", "newton", "pn", "globalized", "regularized", "adaptive"};
const std::set<std::string> kProblems = {"poly1d", "quadratic", "logistic", "matfact"};

void reject_unknown(const toml::table& t, const std::set<std::string>& allowed, const std::string& where)
{
    for (auto&& [key, node] : t) {
        if (!allowed.count(std::string(key.str()))) {
            throw ConfigError(where + ": unknown key '" + std::string(key.str()) + "'");
        }
    }
}

std::string where(const toml::table& t, std::string_view key, const std::string& section)
{
    std::ostringstream os;
    os << section << "." << key;
    if (const toml::node* n = t.get(key)) os << " (line " << n->source().begin.line << ")";
    return os.str();
}

void read(const toml::table& t, std::string_view key, double& out, const std::string& section)
{
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value<double>();
    if (!v) throw ConfigError(where(t, key, section) + ": expected a number");
    out = *v;
}

template <class Int>
void read_int(const toml::table& t, std::string_view key, Int& out, const std::string& section)
{
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value<std::int64_t>();
    if (!v || !n->is_integer()) throw ConfigError(where(t, key, section) + ": expected an integer");
    out = static_cast<Int>(*v);
}

void read(const toml::table& t, std::string_view key, bool& out, const std::string& section)
{
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value<bool>();
    if (!v) throw ConfigError(where(t, key, section) + ": expected a boolean");
    out = *v;
}

void read(const toml::table& t, std::string_view key, std::string& out, const std::string& section)
{
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = n->value<std::string>();
    if (!v) throw ConfigError(where(t, key, section) + ": expected a string");
    out = *v;
}

const toml::table* section(const toml::table& root, std::string_view name)
{
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError("'" + std::string(name) + "' must be a table");
    return n->as_table();
}

SolveMethod parse_method(const std::string& s)
{
    if (s == "auto") return SolveMethod::Auto;
    if (s == "direct") return SolveMethod::Direct;
    if (s == "krylov") return SolveMethod::Krylov;
    throw ConfigError("algorithm.solver: expected auto, direct or krylov, got '" + s + "'");
}

SystemForm parse_form(const std::string& s)
{
    if (s == "transformed") return SystemForm::Transformed;
    if (s == "raw") return SystemForm::Raw;
    throw ConfigError("algorithm.form: expected transformed or raw, got '" + s + "'");
}

std::string method_name(SolveMethod m)
{
    switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::Direct: return "direct";
    case SolveMethod::Krylov: return "krylov";
    }
    return "?";
}

std::string structure_name(Structure s)
{
    switch (s) {
    case Structure::Isotropic: return "isotropic";
    case Structure::Separable: return "separable";
    case Structure::QuadraticForm: return "quadratic_form";
    }
    return "?";
}

}  // namespace

KernelKind parse_kernel_or_throw(const std::string& name)
{
    if (const auto k = parse_kernel_kind(name)) return *k;
    throw ConfigError("unknown kernel '" + name + "' (expected quad, cosh, expabs or logbar)");
}

std::optional<double> parse_scale_or_throw(const std::string& text)
{
    if (text == "auto") return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError("scale must be 'auto' or a positive number, got '" + text + "'");
    }
    return v;
}

RunConfig parse_config(const std::string& toml_text, const std::string& source_name)
{
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source_name << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    reject_unknown(root, {"seed", "out", "problem", "reference", "algorithm", "stopping"}, "top level");

    RunConfig cfg;
    read_int(root, "seed", cfg.seed, "top level");
    read(root, "out", cfg.out, "top level");

    if (const toml::table* t = section(root, "problem")) {
        reject_unknown(*t, {"kind", "p", "n", "r", "cond", "data", "l2", "x0", "x0_scale"}, "problem");
        auto& p = cfg.problem;
        read(*t, "kind", p.kind, "problem");
        read_int(*t, "p", p.p, "problem");
        read_int(*t, "n", p.n, "problem");
        read_int(*t, "r", p.r, "problem");
        read(*t, "cond", p.cond, "problem");
        read(*t, "data", p.data, "problem");
        read(*t, "l2", p.l2, "problem");
        read(*t, "x0_scale", p.x0_scale, "problem");
        if (const toml::node* n = t->get("x0")) {
            const toml::array* arr = n->as_array();
            if (!arr) throw ConfigError(where(*t, "x0", "problem") + ": expected an array of numbers");
            for (const toml::node& e : *arr) {
                const auto v = e.value<double>();
                if (!v) throw ConfigError(where(*t, "x0", "problem") + ": expected an array of numbers");
                p.x0.push_back(*v);
            }
        }
    }

    if (const toml::table* t = section(root, "reference")) {
        reject_unknown(*t, {"kernel", "structure", "scale"}, "reference");
        std::string kernel;
        read(*t, "kernel", kernel, "reference");
        if (!kernel.empty()) cfg.reference.kernel = parse_kernel_or_throw(kernel);
        std::string structure;
        read(*t, "structure", structure, "reference");
        if (structure == "separable") {
            cfg.reference.structure = Structure::Separable;
        } else if (!structure.empty() && structure != "isotropic") {
            throw ConfigError("reference.structure: expected isotropic or separable, got '" + structure + "'");
        }
        if (const toml::node* n = t->get("scale")) {
            if (const auto s = n->value<std::string>()) {
                cfg.reference.scale = parse_scale_or_throw(*s);
            } else if (const auto v = n->value<double>()) {
                if (!(*v > 0.0)) throw ConfigError("reference.scale must be positive");
                cfg.reference.scale = *v;
            } else {
                throw ConfigError(where(*t, "scale", "reference") + ": expected a number or \"auto\"");
            }
        }
    }

    if (const toml::table* t = section(root, "algorithm")) {
        reject_unknown(*t,
                       {"name", "gamma", "L", "alpha", "sigma_ls", "adaptive_L", "max_backtracks", "max_L_doublings",
                        "sigma", "sigma0", "sigma_min", "theta", "eta1", "eta2", "gamma1", "gamma2", "gamma3",
                        "solver", "form", "krylov_tol", "krylov_maxit", "gmres_restart"},
                       "algorithm");
        auto& a = cfg.algorithm;
        read(*t, "name", a.name, "algorithm");
        read(*t, "gamma", a.gamma, "algorithm");
        read(*t, "L", a.globalized.L, "algorithm");
        read(*t, "alpha", a.globalized.alpha, "algorithm");
        read(*t, "sigma_ls", a.globalized.sigma_ls, "algorithm");
        read(*t, "adaptive_L", a.globalized.adaptive_L, "algorithm");
        read_int(*t, "max_backtracks", a.globalized.max_backtracks, "algorithm");
        read_int(*t, "max_L_doublings", a.globalized.max_L_doublings, "algorithm");
        read(*t, "sigma", a.sigma, "algorithm");
        read(*t, "sigma0", a.adaptive.sigma0, "algorithm");
        read(*t, "sigma_min", a.adaptive.sigma_min, "algorithm");
        read(*t, "theta", a.adaptive.theta, "algorithm");
        read(*t, "eta1", a.adaptive.eta1, "algorithm");
        read(*t, "eta2", a.adaptive.eta2, "algorithm");
        read(*t, "gamma1", a.adaptive.gamma1, "algorithm");
        read(*t, "gamma2", a.adaptive.gamma2, "algorithm");
        read(*t, "gamma3", a.adaptive.gamma3, "algorithm");
        std::string solver;
        read(*t, "solver", solver, "algorithm");
        if (!solver.empty()) a.linear.method = parse_method(solver);
        std::string form;
        read(*t, "form", form, "algorithm");
        if (!form.empty()) a.linear.form = parse_form(form);
        read(*t, "krylov_tol", a.linear.krylov_tol, "algorithm");
        read_int(*t, "krylov_maxit", a.linear.krylov_maxit, "algorithm");
        read_int(*t, "gmres_restart", a.linear.gmres_restart, "algorithm");
    }

    if (const toml::table* t = section(root, "stopping")) {
        reject_unknown(*t, {"epsilon", "measure", "max_iters"}, "stopping");
        read(*t, "epsilon", cfg.stopping.epsilon, "stopping");
        read_int(*t, "max_iters", cfg.stopping.max_iters, "stopping");
        std::string measure;
        read(*t, "measure", measure, "stopping");
        if (!measure.empty()) {
            const auto m = parse_stop_measure(measure);
            if (!m) throw ConfigError("stopping.measure: unknown measure '" + measure + "'");
            cfg.stopping.measure = *m;
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str(), path);
}

void apply_overrides(RunConfig& cfg, const Overrides& o)
{
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.out = *o.out;
    if (o.eps) cfg.stopping.epsilon = *o.eps;
    if (o.max_iters) cfg.stopping.max_iters = *o.max_iters;
    if (o.kernel) cfg.reference.kernel = parse_kernel_or_throw(*o.kernel);
    if (o.scale) cfg.reference.scale = parse_scale_or_throw(*o.scale);
    if (o.algo) {
        if (!kAlgorithms.count(*o.algo)) throw ConfigError("--algo: unknown algorithm '" + *o.algo + "'");
        cfg.algorithm.name = *o.algo;
    }
}

void validate(const RunConfig& cfg)
{
    if (!kAlgorithms.count(cfg.algorithm.name)) {
        throw ConfigError("unknown algorithm '" + cfg.algorithm.name +
                          "' (expected pg, newton, pn, globalized, regularized or adaptive)");
    }
    const auto& p = cfg.problem;
    if (!kProblems.count(p.kind)) {
        throw ConfigError("unknown problem kind '" + p.kind + "' (expected poly1d, quadratic, logistic or matfact)");
    }
    if (p.kind == "poly1d" && p.p < 2) throw ConfigError("problem.p must be >= 2");
    if ((p.kind == "quadratic" || p.kind == "matfact") && p.n < 1) throw ConfigError("problem.n must be >= 1");
    if (p.kind == "matfact" && (p.r < 1 || p.r > p.n)) throw ConfigError("problem.r must satisfy 1 <= r <= n");
    if ((p.kind == "quadratic" || p.kind == "matfact") && !(p.cond >= 1.0)) {
        throw ConfigError("problem.cond must be >= 1");
    }
    if (p.kind == "logistic" && p.data.empty()) throw ConfigError("problem.data is required for logistic problems");
    if (!(p.l2 >= 0.0)) throw ConfigError("problem.l2 must be nonnegative");
    if (!(p.x0_scale > 0.0)) throw ConfigError("problem.x0_scale must be positive");
    if (!(cfg.stopping.epsilon > 0.0)) throw ConfigError("stopping.epsilon must be positive");
    if (cfg.stopping.max_iters < 0) throw ConfigError("stopping.max_iters must be nonnegative");
    if (cfg.algorithm.name == "pg" && !(cfg.algorithm.gamma > 0.0)) throw ConfigError("algorithm.gamma must be positive");
    if (cfg.algorithm.name == "regularized" && !(cfg.algorithm.sigma > 0.0)) {
        throw ConfigError("algorithm.sigma must be positive");
    }
    if (!(cfg.algorithm.linear.krylov_tol > 0.0)) throw ConfigError("algorithm.krylov_tol must be positive");
    if (cfg.algorithm.linear.gmres_restart < 1) throw ConfigError("algorithm.gmres_restart must be >= 1");
    try {
        cfg.algorithm.globalized.validate();
        cfg.algorithm.adaptive.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("algorithm.") + e.what());
    }
    if ((cfg.algorithm.name == "regularized" || cfg.algorithm.name == "adaptive") &&
        cfg.reference.structure != Structure::Isotropic) {
        throw ConfigError("regularized and adaptive methods need an isotropic reference");
    }
}

nlohmann::json describe(const RunConfig& cfg)
{
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["problem.kind"] = cfg.problem.kind;
    if (cfg.problem.kind == "poly1d") j["problem.p"] = cfg.problem.p;
    if (cfg.problem.kind == "quadratic" || cfg.problem.kind == "matfact") {
        j["problem.n"] = cfg.problem.n;
        j["problem.cond"] = cfg.problem.cond;
    }
    if (cfg.problem.kind == "matfact") j["problem.r"] = cfg.problem.r;
    if (cfg.problem.kind == "logistic") {
        j["problem.data"] = cfg.problem.data;
        j["problem.l2"] = cfg.problem.l2;
    }
    j["problem.x0_scale"] = cfg.problem.x0_scale;
    j["problem.x0_explicit"] = !cfg.problem.x0.empty();
    j["reference.kernel"] = std::string(to_string(cfg.reference.kernel));
    j["reference.structure"] = structure_name(cfg.reference.structure);
    if (cfg.reference.scale) {
        j["reference.scale"] = *cfg.reference.scale;
    } else {
        j["reference.scale"] = "auto";
    }
    const auto& a = cfg.algorithm;
    j["algorithm.name"] = a.name;
    if (a.name == "pg") j["algorithm.gamma"] = a.gamma;
    if (a.name == "globalized") {
        j["algorithm.L"] = a.globalized.L;
        j["algorithm.alpha"] = a.globalized.alpha;
        j["algorithm.sigma_ls"] = a.globalized.sigma_ls;
        j["algorithm.adaptive_L"] = a.globalized.adaptive_L;
        j["algorithm.max_backtracks"] = a.globalized.max_backtracks;
        j["algorithm.max_L_doublings"] = a.globalized.max_L_doublings;
    }
    if (a.name == "regularized") j["algorithm.sigma"] = a.sigma;
    if (a.name == "adaptive") {
        j["algorithm.sigma0"] = a.adaptive.sigma0;
        j["algorithm.sigma_min"] = a.adaptive.sigma_min;
        j["algorithm.theta"] = a.adaptive.theta;
        j["algorithm.eta1"] = a.adaptive.eta1;
        j["algorithm.eta2"] = a.adaptive.eta2;
        j["algorithm.gamma1"] = a.adaptive.gamma1;
        j["algorithm.gamma2"] = a.adaptive.gamma2;
        j["algorithm.gamma3"] = a.adaptive.gamma3;
    }
    j["algorithm.solver"] = method_name(a.linear.method);
    j["algorithm.form"] = a.linear.form == SystemForm::Raw ? "raw" : "transformed";
    j["algorithm.krylov_tol"] = a.linear.krylov_tol;
    j["algorithm.krylov_maxit"] = a.linear.krylov_maxit;
    j["algorithm.gmres_restart"] = a.linear.gmres_restart;
    j["stopping.epsilon"] = cfg.stopping.epsilon;
    j["stopping.measure"] = std::string(to_string(cfg.stopping.measure));
    j["stopping.max_iters"] = cfg.stopping.max_iters;
    return j;
}

}  // namespace pnewton::cli
