#include <cmath>
#include <cstdlib>
#include <sstream>

#include "hj/caratheodory.hpp"
#include "hj/cli.hpp"
#include "hj/errors.hpp"
#include "hj/random.hpp"

namespace hj::cli {

namespace {

void require_finite(const std::string& key, double v) {
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!text.empty() && text.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

void validate_model(const ModelBlock& m) {
    if (m.family != "discounted" && m.family != "nonlinear_concave" && m.family != "time_rescaled") {
        throw ConfigError("model.family", "must be \"discounted\", \"nonlinear_concave\" or \"time_rescaled\"");
    }
    if (m.dimension != 1 && m.dimension != 2) throw ConfigError("model.dimension", "must be 1 or 2");
    for (int a = 0; a < m.dimension; ++a) {
        if (!(m.period[a] > 0.0) || !std::isfinite(m.period[a])) {
            throw ConfigError("model.period", "must be positive and finite");
        }
    }
    for (double c : m.potential) require_finite("model.potential", c);
    for (double c : m.potential_sin) require_finite("model.potential_sin", c);
    require_finite("model.constant", m.constant);
    require_finite("model.lambda", m.lambda);
    require_finite("model.eps", m.eps);
    if (m.family == "discounted" && m.lambda < 0.0) throw ConfigError("model.lambda", "must be >= 0");
    if (m.family == "nonlinear_concave") {
        if (m.eps < 0.0) throw ConfigError("model.eps", "must be >= 0");
        if (!(m.lambda > m.eps)) throw ConfigError("model.lambda", "must exceed eps");
    }
    if (m.family == "time_rescaled" && !(m.horizon > 0.0)) throw ConfigError("model.horizon", "must be positive");
    const std::size_t want = m.dimension == 1 ? 1 : 3;
    if (m.kinetic.size() != want) {
        throw ConfigError("model.kinetic", m.dimension == 1 ? "needs one entry {a11}" : "needs {a11, a12, a22}");
    }
    const double a11 = m.kinetic[0];
    const double det = m.dimension == 1 ? a11 : a11 * m.kinetic[2] - m.kinetic[1] * m.kinetic[1];
    if (!(a11 > 0.0) || !(det > 0.0)) throw ConfigError("model.kinetic", "must be positive definite");
}

ModelBlock parse_model(const ConfigDocument& doc) {
    ModelBlock m;
    const ConfigDocument t = doc.get_table("model");
    m.family = t.get_string("family", m.family);
    m.potential = t.get_doubles("potential", {});
    m.potential_sin = t.get_doubles("potential_sin", {});
    m.constant = t.get_double("constant", 0.0);
    m.lambda = t.get_double("lambda", m.lambda);
    m.eps = t.get_double("eps", m.family == "nonlinear_concave" ? 0.5 : 0.0);
    m.dimension = static_cast<int>(t.get_int("dimension", 1));
    const auto period = t.get_doubles("period", {1.0});
    if (period.size() == 1) {
        m.period = {period[0], period[0]};
    } else if (period.size() == 2) {
        m.period = {period[0], period[1]};
    } else {
        throw ConfigError("model.period", "expected one or two numbers");
    }
    m.kinetic = t.get_doubles("kinetic", m.dimension == 1 ? std::vector<double>{1.0}
                                                          : std::vector<double>{1.0, 0.0, 1.0});
    m.horizon = t.get_double("horizon", m.horizon);
    t.reject_unused();
    return m;
}

/// Applies one '+'-separated initial-data term at x.
struct InitialTerm {
    std::string kind;
    double amplitude = 0.0;
    int harmonic = 1;
};

std::vector<InitialTerm> parse_initial(const std::string& text) {
    std::vector<InitialTerm> out;
    for (const auto& raw : split(text, '+')) {
        const auto parts = split(trim(raw), ':');
        InitialTerm term;
        term.kind = parts.empty() ? "" : trim(parts[0]);
        const auto bad = [&](const std::string& why) { throw ConfigError("initial", "'" + trim(raw) + "': " + why); };
        if (term.kind == "zero") {
            if (parts.size() != 1) bad("takes no arguments");
        } else if (term.kind == "const" || term.kind == "random") {
            if (parts.size() != 2 || !parse_double(parts[1], term.amplitude)) bad("expected " + term.kind + ":<a>");
            if (term.kind == "random" && term.amplitude < 0.0) bad("amplitude must be >= 0");
        } else if (term.kind == "cos" || term.kind == "sin") {
            double k = 1.0;
            if (parts.size() < 2 || parts.size() > 3 || !parse_double(parts[1], term.amplitude) ||
                (parts.size() == 3 && (!parse_double(parts[2], k) || k != std::floor(k) || k < 0 || k > 1e6))) {
                bad("expected " + term.kind + ":<a>[:<k>] with integer k >= 0");
            }
            term.harmonic = static_cast<int>(k);
        } else {
            bad("unknown term (use const, cos, sin, random or zero)");
        }
        out.push_back(term);
    }
    if (out.empty()) throw ConfigError("initial", "empty");
    return out;
}

Point parse_point(const std::string& text, int dimension) {
    const auto tx = split(trim(text), ':');
    Point p;
    const auto bad = [&]() -> Point {
        throw ConfigError("points", "'" + text + "': expected t:x" + (dimension == 2 ? "1,x2" : ""));
    };
    if (tx.size() != 2 || !parse_double(tx[0], p.t)) return bad();
    const auto xs = split(tx[1], ',');
    if (static_cast<int>(xs.size()) != dimension) return bad();
    for (int a = 0; a < dimension; ++a) {
        if (!parse_double(xs[static_cast<std::size_t>(a)], p.x[static_cast<std::size_t>(a)])) return bad();
    }
    return p;
}

}  // namespace

TonelliSpec tonelli_spec(const ModelBlock& block) {
    validate_model(block);
    TonelliSpec s;
    s.domain.dimension = block.dimension;
    s.domain.period = block.dimension == 1 ? Coord{block.period[0], 1.0} : block.period;
    s.kinetic = block.dimension == 1 ? std::array<double, 3>{block.kinetic[0], 0.0, 1.0}
                                     : std::array<double, 3>{block.kinetic[0], block.kinetic[1], block.kinetic[2]};
    s.potential.constant = block.constant;
    const std::size_t harmonics = std::max(block.potential.size(), block.potential_sin.size());
    for (int a = 0; a < block.dimension; ++a) {
        for (std::size_t k = 0; k < harmonics; ++k) {
            TrigTerm term;
            term.k[static_cast<std::size_t>(a)] = static_cast<int>(k + 1);
            term.cos_coef = k < block.potential.size() ? block.potential[k] : 0.0;
            term.sin_coef = k < block.potential_sin.size() ? block.potential_sin[k] : 0.0;
            if (term.cos_coef != 0.0 || term.sin_coef != 0.0) s.potential.terms.push_back(term);
        }
    }
    return s;
}

LagrangianModel build_model(const ModelBlock& block) {
    const TonelliSpec s = tonelli_spec(block);
    if (block.family == "discounted") return make_discounted(s, block.lambda);
    if (block.family == "nonlinear_concave") return make_nonlinear_concave(s, block.lambda, block.eps);
    return make_time_rescaled(s, block.lambda, block.horizon);
}

std::vector<Point> parse_points(const std::string& text, int dimension) {
    std::vector<Point> out;
    for (const auto& item : split(text, ';')) {
        if (!trim(item).empty()) out.push_back(parse_point(item, dimension));
    }
    return out;
}

void RunConfig::validate() const {
    solver.validate();
    validate_model(model);
    (void)parse_initial(initial);
    if (!(final_time > 0.0) || !std::isfinite(final_time)) throw ConfigError("final_time", "must be positive");
    if (steps < 1) throw ConfigError("steps", "must be >= 1");
    if (final_time / steps < solver.min_horizon) throw ConfigError("steps", "final_time / steps is below min_horizon");
    for (const auto& g : gauges) {
        try {
            (void)parse_gauge(g);
        } catch (const Error& e) {
            throw ConfigError("gauges", e.what());
        }
    }
    for (const auto& p : points) {
        if (!(p.t >= solver.min_horizon) || !std::isfinite(p.t)) {
            throw ConfigError("points", "t must be finite and >= min_horizon");
        }
    }
    if (random_points < 0) throw ConfigError("random_points", "must be >= 0");
    if (!(t_range[0] >= solver.min_horizon) || !(t_range[1] >= t_range[0]) || !std::isfinite(t_range[1])) {
        throw ConfigError("t_range", "needs min_horizon <= t_min <= t_max");
    }
    const int nodes = model.dimension == 1 ? solver.resolution : solver.resolution * solver.resolution;
    for (int k : stationary_nodes) {
        if (k < 0 || k >= nodes) throw ConfigError("stationary_nodes", "node index outside the grid");
    }
    if (experiment != "semigroup" && experiment != "time_rescaling" && experiment != "constant_data" &&
        experiment != "lo_vs_fd") {
        throw ConfigError("experiment", "must be semigroup, time_rescaling, constant_data or lo_vs_fd");
    }
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i] < (experiment == "constant_data" ? 1 : 2)) throw ConfigError("ladder", "levels too small");
        if (i > 0 && ladder[i] <= ladder[i - 1]) throw ConfigError("ladder", "must be strictly increasing");
    }
    if (reference_resolution < 0) throw ConfigError("reference_resolution", "must be >= 0");
    fd.validate();
    if (samples < 1) throw ConfigError("samples", "must be >= 1");
    try {
        box.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError("box", e.what());
    }
    if (out.empty()) throw ConfigError("out", "must not be empty");
}

RunConfig parse_run_config(const ConfigDocument& doc) {
    RunConfig c;
    SolverConfig& s = c.solver;
    const auto int_key = [&](const char* key, int fallback) {
        const long v = doc.get_int(key, fallback);
        if (v < -1'000'000'000L || v > 1'000'000'000L) throw ConfigError(key, "out of range");
        return static_cast<int>(v);
    };
    s.resolution = int_key("resolution", c.model.dimension == 1 ? 64 : 32);
    s.curve_nodes = int_key("curve_nodes", s.curve_nodes);
    s.substeps = int_key("substeps", s.substeps);
    s.grad_tol = doc.get_double("grad_tol", s.grad_tol);
    s.max_iterations = int_key("max_iterations", s.max_iterations);
    s.min_horizon = doc.get_double("min_horizon", s.min_horizon);
    s.max_winding = int_key("max_winding", s.max_winding);
    s.random_starts = int_key("random_starts", s.random_starts);
    s.random_amplitude = doc.get_double("random_amplitude", s.random_amplitude);
    c.seed_given = doc.has("seed");
    const long seed = doc.get_int("seed", 0);
    if (seed < 0) throw ConfigError("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    s.prune = doc.get_bool("prune", s.prune);
    s.stationary_step = doc.get_double("stationary_step", s.stationary_step);
    s.fp_tol = doc.get_double("fp_tol", s.fp_tol);
    s.fp_max_iter = int_key("fp_max_iter", s.fp_max_iter);
    s.tail_tol = doc.get_double("tail_tol", s.tail_tol);
    s.max_tail_horizon = doc.get_double("max_tail_horizon", s.max_tail_horizon);
    s.threads = int_key("threads", s.threads);

    c.model = parse_model(doc);
    if (!doc.has("resolution")) s.resolution = c.model.dimension == 1 ? 64 : 32;
    c.initial = doc.get_string("initial", c.initial);
    c.final_time = doc.get_double("final_time", c.final_time);
    c.steps = int_key("steps", c.steps);
    c.gauges = doc.get_strings("gauges", c.gauges);
    for (const auto& p : doc.get_strings("points", {})) {
        c.points.push_back(parse_point(p, c.model.dimension));
    }
    c.random_points = int_key("random_points", 0);
    const auto tr = doc.get_doubles("t_range", {c.t_range[0], c.t_range[1]});
    if (tr.size() != 2) throw ConfigError("t_range", "expected [t_min, t_max]");
    c.t_range = {tr[0], tr[1]};
    for (long k : doc.get_ints("stationary_nodes", {})) c.stationary_nodes.push_back(static_cast<int>(k));
    c.experiment = doc.get_string("experiment", c.experiment);
    for (long k : doc.get_ints("ladder", {})) {
        if (k > 1'000'000) throw ConfigError("ladder", "level too large");
        c.ladder.push_back(static_cast<int>(k));
    }
    c.reference_resolution = int_key("reference_resolution", 0);

    c.fd.resolution = int_key("fd.resolution", c.fd.resolution);
    c.fd.cfl = doc.get_double("fd.cfl", c.fd.cfl);
    const auto nu = doc.get_doubles("fd.viscosity", {0.0});
    if (nu.size() == 1) {
        c.fd.artificial_viscosity = {nu[0], nu[0]};
    } else if (nu.size() == 2) {
        c.fd.artificial_viscosity = {nu[0], nu[1]};
    } else {
        throw ConfigError("fd.viscosity", "expected one or two numbers");
    }
    c.fd.t_end = doc.get_double("fd.t_end", c.final_time);
    c.fd.steady_tol = doc.get_double("fd.steady_tol", c.fd.steady_tol);
    c.fd.max_steps = doc.get_int("fd.max_steps", c.fd.max_steps);
    c.fd_stationary = doc.get_bool("fd.stationary", false);

    c.samples = int_key("samples", c.samples);
    c.box.s_min = doc.get_double("box.s_min", c.box.s_min);
    c.box.s_max = doc.get_double("box.s_max", c.box.s_max);
    c.box.v_max = doc.get_double("box.v_max", c.box.v_max);
    c.box.u_min = doc.get_double("box.u_min", c.box.u_min);
    c.box.u_max = doc.get_double("box.u_max", c.box.u_max);
    c.out = doc.get_string("out", c.out);
    doc.reject_unused();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(ConfigDocument::load(path)); }

GridFunction initial_data(const RunConfig& cfg, int resolution) {
    const auto terms = parse_initial(cfg.initial);
    const TonelliSpec spec = tonelli_spec(cfg.model);
    const DomainDescriptor& domain = spec.domain;
    GridFunction phi(domain, resolution, 0.0);
    Rng rng(cfg.solver.seed, 0x1217);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const Coord x = phi.node(k);
        double v = 0.0;
        for (const auto& t : terms) {
            if (t.kind == "const") {
                v += t.amplitude;
            } else if (t.kind == "random") {
                v += rng.uniform(-t.amplitude, t.amplitude);
            } else if (t.kind == "cos" || t.kind == "sin") {
                for (int a = 0; a < domain.dimension; ++a) {
                    const double arg = 2.0 * M_PI * t.harmonic * x[static_cast<std::size_t>(a)] /
                                       domain.period[static_cast<std::size_t>(a)];
                    v += t.amplitude * (t.kind == "cos" ? std::cos(arg) : std::sin(arg));
                }
            }
        }
        phi[k] = v;
    }
    return phi;
}

}  // namespace hj::cli
