#pragma once

/// Config-driven benchmark runs: one problem, a list of methods, a list of
/// noise levels; every (noise, method) pair becomes one RunRecord.
///
/// Config (JSON):
///   problem: {"type": "eigen_test", "m": 1}
///          | {"type": "custom", "kernel": "triangular"|"gaussian"|"x_xi2", "sigma": 0.1,
///             "solution": "sin"|"poly"|"exp", "m": 1}
///          | {"type": "bvp_cos"}
///   grid:    {"rule": "simpson", "n": 129}
///   methods: [{"id": "lavrentiev", "alpha": 1e-3}, {"id": "transform", "r": 0.5, "mu": 0.3}, ...]
///            iterative methods also take "stop": "distance" | "discrepancy", "c1", "tol", "max_iters"
///   noise:   [{"delta_rel": 0.01, "shape": "white_fourier", "modes": 16}, {"delta": 1e-4}]
///   seed:    integer
///   output:  {"csv": "results.csv", "profiles": false}

#include "fredholm/classical.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/first_kind.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/transform.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fredholm::bench {

using json = nlohmann::json;

/// Raised for anything wrong with the configuration itself.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct MethodSpec {
    std::string id;
    json params;
};

struct NoiseLevel {
    std::optional<double> delta;      ///< absolute L2 norm
    std::optional<double> delta_rel;  ///< fraction of ||f||
    NoiseShape shape = NoiseShape::white_fourier;
    int modes = 16;
};

struct ExperimentConfig {
    json problem;
    QuadRule rule = QuadRule::simpson;
    std::size_t n = 129;
    std::vector<MethodSpec> methods;
    std::vector<NoiseLevel> noise;
    std::uint64_t seed = 0;
    std::string csv_name = "results.csv";
    bool profiles = false;
};

struct RunRecord {
    std::string method;
    std::string param_summary;
    double delta = 0.0;
    std::optional<double> rel_error;
    std::optional<double> residual;
    int iterations = 0;
    double wall_ms = 0.0;
    bool converged = false;
    Vector solution;  ///< kept for profile output, not serialized to the table
};

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> ids = {"lavrentiev", "transform",        "transform_alt", "fridman",     "landweber",
                                                 "averaged",   "implicit",         "steepest_descent", "quasisolution"};
    return ids;
}

inline ExperimentConfig parse_config(const json& j) {
    try {
        ExperimentConfig c;
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (!j.contains("problem") || !j["problem"].is_object()) throw ConfigError("config needs a 'problem' object");
        c.problem = j["problem"];
        const std::string type = c.problem.value("type", "");
        if (type != "eigen_test" && type != "custom" && type != "bvp_cos") throw ConfigError("unknown problem type '" + type + "'");
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            c.rule = parse_quad_rule(g.value("rule", "simpson"));
            const long n = g.value("n", 129L);
            if (n < 2) throw ConfigError("grid.n must be at least 2");
            c.n = static_cast<std::size_t>(n);
            (void)build_grid(0.0, 1.0, c.rule, c.n);
        }
        if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
            throw ConfigError("config needs a non-empty 'methods' array");
        for (const auto& m : j["methods"]) {
            MethodSpec s{m.value("id", ""), m};
            if (std::find(known_methods().begin(), known_methods().end(), s.id) == known_methods().end())
                throw ConfigError("unknown method id '" + s.id + "'");
            c.methods.push_back(std::move(s));
        }
        if (j.contains("noise")) {
            for (const auto& nz : j["noise"]) {
                NoiseLevel lv;
                if (nz.contains("delta")) lv.delta = nz["delta"].get<double>();
                if (nz.contains("delta_rel")) lv.delta_rel = nz["delta_rel"].get<double>();
                if (lv.delta.value_or(0.0) < 0.0 || lv.delta_rel.value_or(0.0) < 0.0) throw ConfigError("noise levels must be non-negative");
                const std::string shape = nz.value("shape", "white_fourier");
                if (shape == "white_fourier") lv.shape = NoiseShape::white_fourier;
                else if (shape == "single_mode") lv.shape = NoiseShape::single_mode;
                else throw ConfigError("unknown noise shape '" + shape + "'");
                lv.modes = nz.value("modes", 16);
                c.noise.push_back(lv);
            }
        }
        if (c.noise.empty()) c.noise.push_back(NoiseLevel{0.0, std::nullopt, NoiseShape::white_fourier, 16});
        c.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("output")) {
            c.csv_name = j["output"].value("csv", c.csv_name);
            c.profiles = j["output"].value("profiles", false);
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("unparseable config: ") + e.what());
    }
    return parse_config(j);
}

/// The concrete problem a config describes.
struct BenchProblem {
    FirstKindProblem problem;
    std::optional<SpectralBasis> basis;  ///< when the kernel's spectrum is known in closed form
    std::string name;
};

namespace detail {

// ∫_0^1 k(x, xi) s(xi) dxi with the panel split at xi = x so diagonal kinks sit on a panel edge.
inline Function1 image_of(const Kernel2& k, const Function1& s) {
    return [k, s](double x) {
        double out = 0.0;
        for (auto [lo, hi] : {std::pair{0.0, x}, std::pair{x, 1.0}}) {
            if (hi - lo <= 0.0) continue;
            const Grid q = build_grid(lo, hi, QuadRule::gauss_legendre, 48);
            for (std::size_t i = 0; i < q.size(); ++i) out += q.weight(i) * k(x, q.node(i)) * s(q.node(i));
        }
        return out;
    };
}

}  // namespace detail

inline BenchProblem make_problem(const json& spec) {
    const std::string type = spec.value("type", "");
    const double pi = std::numbers::pi;
    BenchProblem b;
    if (type == "eigen_test") {
        const int m = spec.value("m", 1);
        if (m < 1) throw ConfigError("eigen_test needs m >= 1");
        const double w = m * pi;
        b.problem.kernel = triangular_kernel;
        b.problem.f = [w](double x) { return std::sin(w * x) / (w * w); };
        b.problem.exact_solution = [w](double x) { return std::sin(w * x); };
        b.basis = canonical_spectrum(SpectrumKind::triangular_unit, 64);
        b.name = "eigen_test(" + std::to_string(m) + ")";
        return b;
    }
    if (type == "bvp_cos") {
        // u = [∫_0^x (x - xi) - ∫_0^1 (1 - xi)] u'' for u'(0) = u(1) = 0; recover u'' from u = cos(pi x / 2)
        b.problem.kernel = [](double x, double xi) { return (xi <= x ? x - xi : 0.0) - (1.0 - xi); };
        b.problem.f = [pi](double x) { return std::cos(0.5 * pi * x); };
        b.problem.exact_solution = [pi](double x) { return -0.25 * pi * pi * std::cos(0.5 * pi * x); };
        b.name = "bvp_cos";
        return b;
    }
    const std::string kname = spec.value("kernel", "triangular");
    if (kname == "triangular") {
        b.problem.kernel = triangular_kernel;
    } else if (kname == "gaussian") {
        const double sigma = spec.value("sigma", 0.1);
        if (!(sigma > 0.0)) throw ConfigError("gaussian kernel needs sigma > 0");
        b.problem.kernel = [sigma](double x, double xi) { return std::exp(-0.5 * (x - xi) * (x - xi) / (sigma * sigma)); };
    } else if (kname == "x_xi2") {
        b.problem.kernel = [](double x, double xi) { return x * xi * xi; };
    } else {
        throw ConfigError("unknown kernel '" + kname + "'");
    }
    const std::string sname = spec.value("solution", "sin");
    Function1 sol;
    if (sname == "sin") {
        const double w = spec.value("m", 1) * pi;
        sol = [w](double x) { return std::sin(w * x); };
    } else if (sname == "poly") {
        sol = [](double x) { return x * (1.0 - x); };
    } else if (sname == "exp") {
        sol = [](double x) { return std::exp(x); };
    } else {
        throw ConfigError("unknown solution '" + sname + "'");
    }
    b.problem.exact_solution = sol;
    b.problem.f = detail::image_of(b.problem.kernel, sol);
    b.name = "custom(" + kname + "," + sname + ")";
    return b;
}

/// Shortest round-trip decimal form, independent of locale.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string sanitize(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ch == ',' ? ';' : ' ';
    return s;
}

inline IterationParams iteration_params(const json& m, IterationScheme scheme, const DiscreteOperator& a, double delta) {
    IterationParams p;
    p.scheme = scheme;
    p.max_iters = m.value("max_iters", 5000);
    p.stop.c1 = m.value("c1", 1.0);
    p.stop.fallback_tol = m.value("tol", 1e-10);
    const std::string stop = m.value("stop", "distance");
    if (stop == "discrepancy") p.stop.measure = StopMeasure::discrepancy;
    else if (stop != "distance") throw ConfigError("stop must be distance or discrepancy");
    if (delta > 0.0) p.stop.delta = delta;
    switch (scheme) {
        case IterationScheme::fridman: p.step = m.value("step", 1.0 / largest_eigenvalue(a)); break;
        case IterationScheme::landweber: p.step = m.value("step", 1.0 / normal_operator_norm(a)); break;
        case IterationScheme::implicit: p.step = m.value("alpha", 1e-2); break;
        case IterationScheme::averaged:
        case IterationScheme::steepest_descent: break;
    }
    if (m.contains("lambda1")) p.lambda1 = m["lambda1"].get<double>();
    return p;
}

}  // namespace detail

/// One (method, noise) run. Errors are captured in the record.
inline RunRecord run_one(const BenchProblem& bp, const Grid& grid, const MethodSpec& ms, const NoiseLevel& nl, std::uint64_t seed) {
    RunRecord rec;
    rec.method = ms.id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const DiscreteOperator a = discretize_kernel(bp.problem.kernel, grid, grid);
        const Vector f_exact = grid.sample(bp.problem.f);
        double delta = nl.delta.value_or(0.0);
        if (nl.delta_rel) delta = *nl.delta_rel * l2_norm(grid, f_exact);
        rec.delta = delta;
        const Vector f = inject_noise(f_exact, NoiseSpec{delta, seed, nl.shape, nl.modes}, grid);
        const json& m = ms.params;
        MethodResult r;
        const std::string& id = ms.id;
        if (id == "lavrentiev") {
            r = lavrentiev_solve(a, f, RegularizationParams{m.value("alpha", 1e-3), {}, RegularizationVariant::lavrentiev});
        } else if (id == "transform" || id == "transform_alt") {
            TransformConfig c;
            c.r = m.value("r", 0.5);
            c.mu = m.value("mu", 0.3);
            c.n_resolvent_terms = m.value("n_terms", 60);
            c.grid = grid;
            TransformResult t;
            std::string extra;
            if (id == "transform") {
                const std::string how = m.value("solve", "direct");
                if (how != "direct" && how != "iterate") throw ConfigError("transform.solve must be direct or iterate");
                t = solve_transform(a, f, c, how == "direct" ? TransformMethod::direct : TransformMethod::iterate);
                extra = ";solve=" + how;
            } else {
                const std::string v = m.value("variant", "body");
                if (v != "body" && v != "conclusions") throw ConfigError("transform_alt.variant must be body or conclusions");
                t = solve_alternative_467(a, f, c, v == "body" ? AlternativeVariant::body : AlternativeVariant::conclusions);
                extra = ";variant=" + v;
            }
            r.solution = t.psi1;
            r.residual_history = {t.residual};
            r.iterations_used = t.iterations;
            r.converged = true;
            r.params_summary = "r=" + format_double(c.r) + ";mu=" + format_double(c.mu) + ";N=" + std::to_string(c.n_resolvent_terms) +
                               extra + ";muM=" + format_double(t.report.mu_times_M);
        } else if (id == "quasisolution") {
            if (!bp.basis) throw ConfigError("quasisolution needs a problem with a closed-form spectrum");
            const double R = m.value("R", 1.0);
            const auto terms = static_cast<std::size_t>(m.value("n_terms", 32));
            const Vector noise = f - f_exact;
            const SpectralBasis& basis = *bp.basis;
            Function1 fn = bp.problem.f;
            if (delta > 0.0) {
                // the perturbation is a finite sine series; recover it as a function
                std::vector<double> coeff(static_cast<std::size_t>(nl.modes));
                const double pi = std::numbers::pi;
                for (std::size_t k = 0; k < coeff.size(); ++k)
                    coeff[k] = 2.0 * inner(grid, noise, grid.sample([&](double x) { return std::sin((k + 1) * pi * x); }));
                fn = [g = bp.problem.f, coeff, pi](double x) {
                    double s = g(x);
                    for (std::size_t k = 0; k < coeff.size(); ++k) s += coeff[k] * std::sin((k + 1) * pi * x);
                    return s;
                };
            }
            QuasiSolution q = quasisolution_solve(basis, fn, R, terms, grid);
            r = std::move(q.result);
            r.residual_history = {residual_norm(a, f, r.solution)};
        } else {
            IterationScheme scheme = IterationScheme::fridman;
            if (id == "landweber") scheme = IterationScheme::landweber;
            else if (id == "averaged") scheme = IterationScheme::averaged;
            else if (id == "implicit") scheme = IterationScheme::implicit;
            else if (id == "steepest_descent") scheme = IterationScheme::steepest_descent;
            const IterationParams p = detail::iteration_params(m, scheme, a, delta);
            r = iterate(a, f, p, Vector::Zero(f.size()));
            r.params_summary += ";stop=" + std::string(p.stop.measure == StopMeasure::discrepancy ? "discrepancy" : "distance") +
                                ";max_iters=" + std::to_string(p.max_iters);
        }
        rec.param_summary = detail::sanitize(r.params_summary);
        rec.residual = r.residual_history.back();
        rec.iterations = r.iterations_used;
        rec.converged = r.converged;
        if (bp.problem.exact_solution) {
            const Vector ex = grid.sample(*bp.problem.exact_solution);
            rec.rel_error = l2_norm(grid, r.solution - ex) / l2_norm(grid, ex);
        }
        rec.solution = std::move(r.solution);
    } catch (const std::exception& e) {
        rec.converged = false;
        rec.param_summary = detail::sanitize(std::string("error=") + e.what());
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

/// Runs every (noise level, method) pair in config order. `jobs` worker
/// threads share the runs; record order never depends on completion order.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& c, unsigned jobs = 1) {
    const BenchProblem bp = make_problem(c.problem);
    const Grid grid = build_grid(0.0, 1.0, c.rule, c.n);
    struct Task {
        std::size_t method;
        std::size_t noise;
    };
    std::vector<Task> tasks;
    for (std::size_t nz = 0; nz < c.noise.size(); ++nz)
        for (std::size_t m = 0; m < c.methods.size(); ++m) tasks.push_back({m, nz});
    std::vector<RunRecord> out(tasks.size());
    auto run = [&](std::size_t i) {
        const Task& t = tasks[i];
        out[i] = run_one(bp, grid, c.methods[t.method], c.noise[t.noise], c.seed + t.noise);
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) run(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

inline constexpr const char* csv_header = "method,param_summary,delta,rel_error,residual,iterations,wall_ms,converged";

/// One row per record, LF endings. wall_ms stays empty unless timing is requested,
/// which keeps the table reproducible byte for byte.
inline void emit_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path, bool include_timing = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << csv_header << '\n';
    for (const auto& r : records) {
        out << r.method << ',' << r.param_summary << ',' << format_double(r.delta) << ','
            << (r.rel_error ? format_double(*r.rel_error) : "") << ',' << (r.residual ? format_double(*r.residual) : "") << ','
            << r.iterations << ',' << (include_timing ? format_double(r.wall_ms) : "") << ',' << (r.converged ? "true" : "false") << '\n';
    }
    if (!out) throw Error("failed while writing " + path.string());
}

/// Splits one CSV line on commas (fields never contain commas or quotes).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields(1);
    for (char ch : line) {
        if (ch == ',') fields.emplace_back();
        else fields.back() += ch;
    }
    return fields;
}

inline void emit_profile(const Vector& solution, const Grid& grid, const std::filesystem::path& path) {
    if (static_cast<std::size_t>(solution.size()) != grid.size() && solution.size() != 0)
        throw InvalidArgument("emit_profile: length mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "x,value\n";
    for (Eigen::Index i = 0; i < solution.size(); ++i)
        out << format_double(grid.node(static_cast<std::size_t>(i))) << ',' << format_double(solution[i]) << '\n';
    if (!out) throw Error("failed while writing " + path.string());
}

}  // namespace fredholm::bench
