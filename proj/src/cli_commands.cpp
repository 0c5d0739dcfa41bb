#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "hj/cli.hpp"
#include "hj/errors.hpp"
#include "hj/fd_oracle.hpp"
#include "hj/herglotz.hpp"
#include "hj/lax_oleinik.hpp"
#include "hj/random.hpp"
#include "hj/repformulas.hpp"

namespace hj::cli {

using json = nlohmann::ordered_json;

const std::vector<std::string>& commands() {
    static const std::vector<std::string> list{"solve-evolution", "solve-stationary",   "fundamental-solution",
                                               "compare-formulas", "fd-solve",           "convergence-study",
                                               "check-conditions"};
    return list;
}

namespace {

struct Context {
    RunConfig cfg;
    LagrangianModel model;
    const Flags& flags;
    std::ostream& out;
    std::ostream& err;
};

std::string frame_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frames/frame_%04zu.csv", k);
    return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Coord parse_coord(const std::string& text, int dimension, const char* flag) {
    std::istringstream in(text);
    Coord c{0.0, 0.0};
    std::string part;
    int a = 0;
    while (std::getline(in, part, ',')) {
        char* end = nullptr;
        if (a >= dimension) throw ConfigError(flag, "expected " + std::to_string(dimension) + " coordinate(s)");
        c[static_cast<std::size_t>(a)] = std::strtod(part.c_str(), &end);
        if (part.empty() || *end != '\0' || !std::isfinite(c[static_cast<std::size_t>(a)])) {
            throw ConfigError(flag, "'" + text + "' is not a coordinate list");
        }
        ++a;
    }
    if (a != dimension) throw ConfigError(flag, "expected " + std::to_string(dimension) + " coordinate(s)");
    return c;
}

HamiltonianModel hamiltonian_for(const LagrangianModel& model) {
    if (auto h = closed_form_hamiltonian(model)) return *h;
    return legendre_to_hamiltonian(model);
}

/// Largest weak-form stationarity residual of the minimizers of one step.
double step_residual(const LagrangianModel& model, const GridFunction& from, const std::vector<int>& argmin,
                     const std::vector<Curve>& curves, int substeps) {
    double worst = 0.0;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const auto traj = solve_caratheodory(model, curves[k], from[static_cast<std::size_t>(argmin[k])], substeps);
        worst = std::max(worst, herglotz_residual(model, curves[k], traj));
    }
    return worst;
}

json solver_json(const RunConfig& c) {
    return {{"resolution", c.solver.resolution},
            {"curve_nodes", c.solver.curve_nodes},
            {"substeps", c.solver.substeps},
            {"seed", c.solver.seed},
            {"model", c.model.family},
            {"dimension", c.model.dimension}};
}

int solve_evolution(Context& ctx) {
    const auto& c = ctx.cfg;
    const GridFunction phi = initial_data(c, c.solver.resolution);
    const EvolutionResult res = evolve(ctx.model, phi, c.final_time, c.steps, c.solver);
    RunWriter w(c.out);
    json residuals = json::array();
    for (std::size_t k = 0; k < res.frames.size(); ++k) {
        w.write_grid(frame_name(k), res.frames[k]);
        if (k > 0) {
            residuals.push_back(number(step_residual(ctx.model, res.frames[k - 1], res.argmin[k - 1],
                                                     res.curves[k - 1], c.solver.substeps)));
        }
    }
    json extra = solver_json(c);
    extra["times"] = res.times;
    extra["residuals"] = residuals;
    w.finish("solve-evolution", extra.dump());
    ctx.out << "frames " << res.frames.size() << " written to " << c.out << "\n";
    ctx.out << "u(T) min " << format_number(res.frames.back().min()) << " max "
            << format_number(res.frames.back().max()) << "\n";
    return kExitOk;
}

int solve_stationary(Context& ctx) {
    const auto& c = ctx.cfg;
    const StationaryResult res = stationary_fixed_point(ctx.model, c.solver);
    RunWriter w(c.out);
    w.write_grid("frames/stationary.csv", res.u);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < res.history.size(); ++i) rows.push_back({static_cast<double>(i + 1), res.history[i]});
    w.write_csv("tables/history.csv", {"iteration", "update"}, rows);
    json extra = solver_json(c);
    extra["stationary_step"] = c.solver.stationary_step;
    extra["iterations"] = res.iterations;
    extra["residual"] = res.residual;
    extra["stationarity_residual"] =
        step_residual(ctx.model, res.u, res.step.argmin, res.step.curves, c.solver.substeps);
    w.finish("solve-stationary", extra.dump());
    ctx.out << "iterations " << res.iterations << " residual " << format_number(res.residual) << "\n";
    return kExitOk;
}

int fundamental(Context& ctx) {
    const auto& c = ctx.cfg;
    const int dim = c.model.dimension;
    if (!ctx.flags.x) throw ConfigError("--x", "required");
    if (!ctx.flags.y) throw ConfigError("--y", "required");
    const double t1 = ctx.flags.t1.value_or(0.0);
    const double t2 = ctx.flags.t2.value_or(t1 + c.final_time);
    const double u0 = ctx.flags.u0.value_or(0.0);
    if (!std::isfinite(t1) || !std::isfinite(t2) || !(t2 - t1 >= c.solver.min_horizon)) {
        throw ConfigError("--t2", "t2 - t1 must be finite and >= min_horizon");
    }
    if (!std::isfinite(u0)) throw ConfigError("--u0", "must be finite");
    const Coord x = parse_coord(*ctx.flags.x, dim, "--x");
    const Coord y = parse_coord(*ctx.flags.y, dim, "--y");
    const HerglotzResult r = fundamental_solution(ctx.model, t1, t2, x, y, u0, c.solver);

    auto& o = ctx.out;
    o << "value," << format_number(r.value) << "\n";
    o << "end_value," << format_number(r.end_value()) << "\n";
    o << "stationarity_residual," << format_number(r.stationarity_residual) << "\n";
    o << "converged," << (r.converged ? "true" : "false") << "\n";
    o << "\n" << (dim == 1 ? "s,x" : "s,x1,x2") << "\n";
    for (int i = 0; i <= r.minimizer.segments(); ++i) {
        o << format_number(r.minimizer.time(i)) << "," << format_number(r.minimizer.points[static_cast<std::size_t>(i)][0]);
        if (dim == 2) o << "," << format_number(r.minimizer.points[static_cast<std::size_t>(i)][1]);
        o << "\n";
    }
    if (ctx.flags.json) {
        json d;
        d["value"] = number(r.value);
        d["end_value"] = number(r.end_value());
        d["stationarity_residual"] = number(r.stationarity_residual);
        d["grad_norm"] = number(r.grad_norm);
        d["starts_tried"] = r.starts_tried;
        json starts = json::array();
        for (const auto& s : r.starts) {
            starts.push_back({{"kind", s.kind},
                              {"winding", std::vector<int>(s.winding.begin(), s.winding.begin() + dim)},
                              {"value", number(s.value)},
                              {"converged", s.converged},
                              {"pruned", s.pruned},
                              {"iterations", s.iterations},
                              {"grad_norm", number(s.grad_norm)}});
        }
        d["starts"] = starts;
        json minima = json::array();
        for (const auto& m : r.local_minima) minima.push_back(number(m.value));
        d["local_minima"] = minima;
        o << "\n" << d.dump(2) << "\n";
    }
    if (ctx.flags.dump_trajectory) {
        const auto& tr = r.trajectory;
        std::ostringstream csv;
        csv << (dim == 1 ? "s,x,v,u" : "s,x1,x2,v1,v2,u") << "\n";
        const int sub = tr.substeps();
        const int segs = tr.curve.segments();
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const int seg = std::min(static_cast<int>(k) / sub, segs - 1);
            const Coord pos = tr.curve.position(tr.times[k]);
            const Coord v = tr.curve.velocity(seg);
            csv << format_number(tr.times[k]);
            for (int a = 0; a < dim; ++a) csv << "," << format_number(pos[static_cast<std::size_t>(a)]);
            for (int a = 0; a < dim; ++a) csv << "," << format_number(v[static_cast<std::size_t>(a)]);
            csv << "," << format_number(tr.u_values[k]) << "\n";
        }
        const std::filesystem::path p(*ctx.flags.dump_trajectory);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f || !(f << csv.str())) throw Error("cannot write '" + p.string() + "'");
    }
    return kExitOk;
}

std::vector<Point> formula_points(const Context& ctx) {
    const auto& c = ctx.cfg;
    std::vector<Point> pts = ctx.flags.points ? parse_points(*ctx.flags.points, c.model.dimension) : c.points;
    for (const auto& p : pts) {
        if (!(p.t >= c.solver.min_horizon) || !std::isfinite(p.t)) throw ConfigError("points", "t below min_horizon");
    }
    Rng rng(c.solver.seed, 0x9017);
    for (int i = 0; i < c.random_points; ++i) {
        Point p;
        p.t = rng.uniform(c.t_range[0], c.t_range[1]);
        for (int a = 0; a < c.model.dimension; ++a) {
            p.x[static_cast<std::size_t>(a)] = rng.uniform(0.0, c.model.period[static_cast<std::size_t>(a)]);
        }
        pts.push_back(p);
    }
    if (pts.empty()) throw ConfigError("points", "no evaluation points (set points, random_points or --points)");
    return pts;
}

std::string point_label(const Point& p, int dim) {
    std::string s = format_number(p.t) + ":" + format_number(p.x[0]);
    if (dim == 2) s += "," + format_number(p.x[1]);
    return s;
}

int compare_formulas(Context& ctx) {
    const auto& c = ctx.cfg;
    const auto& model = ctx.model;
    const int dim = c.model.dimension;
    const auto pts = formula_points(ctx);
    std::vector<Gauge> gauges;
    for (const auto& g : c.gauges) gauges.push_back(parse_gauge(g));
    const GridFunction phi = initial_data(c, c.solver.resolution);

    std::vector<std::vector<std::string>> rows;
    std::map<std::string, double> pair_max;
    int violations = 0;
    const auto record = [&](const std::string& label, std::vector<FormulaReport>& reports) {
        for (std::size_t i = 0; i < reports.size(); ++i) {
            rows.push_back({label, reports[i].label, format_number(reports[i].value),
                            format_number(reports[i].discrepancy)});
            violations += reports[i].bound_violations;
            for (std::size_t j = i + 1; j < reports.size(); ++j) {
                const std::string key = reports[i].label + "|" + reports[j].label;
                const double d = std::abs(reports[i].value - reports[j].value);
                pair_max[key] = std::max(pair_max[key], d);
            }
        }
    };

    for (const auto& p : pts) {
        const CandidateSet set = evolution_candidates(model, phi, p.t, p.x, c.solver);
        std::vector<FormulaReport> reports{rep_I(model, set), rep_II(model, set)};
        if (model.declares(Condition::L5)) reports.push_back(rep_III(model, phi, set, c.solver));
        reports.push_back(rep_VI(model, set));
        for (const auto& g : gauges) reports.push_back(rep_VII(model, set, g));
        if (model.discount_rate()) reports.push_back(disc_evolution(model, set));
        compare_against(reports, reports.front());
        record(point_label(p, dim), reports);
    }

    json stationary = json::object();
    if (!c.stationary_nodes.empty()) {
        const StationaryResult fixed = stationary_fixed_point(model, c.solver);
        stationary["iterations"] = fixed.iterations;
        stationary["residual"] = fixed.residual;
        for (int node : c.stationary_nodes) {
            const CalibratedCurve cal = backward_calibrated_curve(model, fixed, node, c.solver);
            std::vector<FormulaReport> reports{rep_IV(model, cal)};
            if (model.declares(Condition::L5)) reports.push_back(rep_V(model, cal, c.solver));
            if (model.discount_rate()) reports.push_back(disc_stationary(model, cal));
            FormulaReport lo;
            lo.label = "LO";
            lo.value = fixed.u[static_cast<std::size_t>(node)];
            reports.push_back(lo);
            compare_against(reports, reports.front());
            std::string label = "node:" + std::to_string(node);
            record(label, reports);
            stationary["tail_bound"] = std::max(stationary.value("tail_bound", 0.0), cal.tail_bound);
            stationary["max_horizon"] = std::max(stationary.value("max_horizon", 0.0), cal.horizon);
        }
    }

    RunWriter w(c.out);
    w.write_table("tables/formulas.csv", {"point", "formula_id", "value", "discrepancy"}, rows);
    json pairs = json::object();
    double worst = 0.0;
    for (const auto& [k, v] : pair_max) {
        pairs[k] = v;
        worst = std::max(worst, v);
    }
    json extra = solver_json(c);
    extra["points"] = pts.size();
    extra["max_pairwise_discrepancy"] = pairs;
    extra["bound_violations"] = violations;
    if (!c.stationary_nodes.empty()) extra["stationary"] = stationary;
    w.finish("compare-formulas", extra.dump());
    ctx.out << "points " << pts.size() << " formulas " << rows.size() << " max pairwise discrepancy "
            << format_number(worst) << "\n";
    for (const auto& [k, v] : pair_max) ctx.out << "  " << k << " " << format_number(v) << "\n";
    return kExitOk;
}

int fd_solve(Context& ctx) {
    const auto& c = ctx.cfg;
    const HamiltonianModel h = hamiltonian_for(ctx.model);
    RunWriter w(c.out);
    json extra = solver_json(c);
    extra["resolution"] = c.fd.resolution;
    FDResult r;
    if (c.fd_stationary) {
        r = fd_stationary(h, c.fd);
        w.write_grid("frames/stationary.csv", r.u);
    } else {
        const GridFunction phi = initial_data(c, c.fd.resolution);
        r = fd_evolve(h, phi, c.fd);
        w.write_grid(frame_name(0), phi);
        w.write_grid(frame_name(1), r.u);
        extra["times"] = {0.0, r.time};
    }
    extra["fd_steps"] = r.steps;
    extra["max_hp"] = r.max_hp;
    extra["viscosity_below_hp"] = r.viscosity_below_hp;
    w.finish("fd-solve", extra.dump());
    ctx.out << "fd steps " << r.steps << " time " << format_number(r.time) << "\n";
    return kExitOk;
}

GridFunction restrict_to(const GridFunction& fine, int resolution) {
    const int stride = fine.resolution / resolution;
    GridFunction out(fine.domain, resolution, 0.0);
    for (int j = 0; j < (fine.domain.dimension == 2 ? resolution : 1); ++j) {
        for (int i = 0; i < resolution; ++i) out[out.index(i, j)] = fine[fine.index(i * stride, j * stride)];
    }
    return out;
}

int convergence_study(Context& ctx) {
    const auto& c = ctx.cfg;
    if (c.ladder.size() < 3) throw ConfigError("ladder", "needs at least 3 levels");
    const auto& model = ctx.model;
    std::vector<double> hs, errors;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> header{"level", "h", "error"};
    double period = c.model.period[0];

    if (c.experiment == "constant_data") {
        if (!c.model.potential.empty() || !c.model.potential_sin.empty()) {
            throw ConfigError("model.potential", "constant_data needs V = 0");
        }
        if (c.model.family != "discounted") throw ConfigError("model.family", "constant_data needs \"discounted\"");
        const GridFunction phi = initial_data(c, c.solver.resolution);
        if (phi.max() != phi.min()) throw ConfigError("initial", "constant_data needs constant initial data");
        const double exact = phi[0] * std::exp(-c.model.lambda * c.final_time);
        for (int sub : c.ladder) {
            SolverConfig s = c.solver;
            s.substeps = sub;
            const auto u = evolve(model, phi, c.final_time, 1, s).frames.back();
            double err = 0.0;
            for (double v : u.values) err = std::max(err, std::abs(v - exact));
            const double h = c.final_time / ((s.curve_nodes + 1) * sub);
            hs.push_back(h);
            errors.push_back(err);
            rows.push_back({static_cast<double>(sub), h, err});
        }
    } else {
        GridFunction reference;
        if (c.experiment == "time_rescaling") {
            if (c.model.family != "discounted") throw ConfigError("model.family", "time_rescaling needs \"discounted\"");
            const int nref = c.reference_resolution > 0 ? c.reference_resolution : 4 * c.ladder.back();
            for (int n : c.ladder) {
                if (nref % n != 0 || nref <= n) {
                    throw ConfigError("reference_resolution", "must be a proper multiple of every ladder level");
                }
            }
            SolverConfig s = c.solver;
            s.resolution = nref;
            reference = time_rescaling_check(tonelli_spec(c.model), c.model.lambda, initial_data(c, nref),
                                             c.final_time, c.steps, s)
                            .u;
            header.push_back("same_grid_defect");
        }
        for (int n : c.ladder) {
            SolverConfig s = c.solver;
            s.resolution = n;
            const GridFunction phi = initial_data(c, n);
            double err = 0.0;
            double extra_col = std::nan("");
            if (c.experiment == "semigroup") {
                const auto a = evolve(model, phi, c.final_time, 1, s).frames.back();
                const auto b = evolve(model, phi, c.final_time, 2, s).frames.back();
                err = sup_distance(a, b);
            } else if (c.experiment == "lo_vs_fd") {
                const auto a = evolve(model, phi, c.final_time, c.steps, s).frames.back();
                FDConfig f = c.fd;
                f.resolution = n;
                f.t_end = c.final_time;
                const auto b = fd_evolve(hamiltonian_for(model), phi, f).u;
                err = sup_distance(a, b);
            } else {
                const auto r = time_rescaling_check(tonelli_spec(c.model), c.model.lambda, phi, c.final_time,
                                                    c.steps, s);
                const GridFunction ref = restrict_to(reference, n);
                const double w = std::exp(c.model.lambda * c.final_time);
                for (std::size_t k = 0; k < r.v.size(); ++k) err = std::max(err, std::abs(r.v[k] - w * ref[k]));
                extra_col = r.defect;
            }
            const double h = period / n;
            hs.push_back(h);
            errors.push_back(err);
            rows.push_back({static_cast<double>(n), h, err});
            if (header.size() == 4) rows.back().push_back(extra_col);
        }
    }
    const double slope = loglog_slope(hs, errors);
    RunWriter w(c.out);
    w.write_csv("tables/convergence.csv", header, rows);
    json extra = solver_json(c);
    extra["experiment"] = c.experiment;
    extra["ladder"] = c.ladder;
    extra["slope"] = number(slope);
    w.finish("convergence-study", extra.dump());
    ctx.out << "experiment " << c.experiment << "\n";
    for (const auto& r : rows) {
        ctx.out << "  level " << format_number(r[0]) << " h " << format_number(r[1]) << " error "
                << format_number(r[2]) << "\n";
    }
    ctx.out << "slope " << format_number(slope) << "\n";
    return kExitOk;
}

int check_conditions_cmd(Context& ctx) {
    const auto& c = ctx.cfg;
    const ConditionReport rep = check_conditions(ctx.model, c.samples, c.box, c.solver.seed + 1);
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < kConditionCount; ++i) {
        const auto& r = rep.results[static_cast<std::size_t>(i)];
        rows.push_back({condition_name(r.condition), r.declared ? "true" : "false", r.passed ? "pass" : "fail",
                        format_number(r.worst_margin)});
        ctx.out << condition_name(r.condition) << (r.declared ? " declared " : " undeclared ")
                << (r.passed ? "pass" : "FAIL") << " worst_margin " << format_number(r.worst_margin) << "\n";
    }
    const bool ok = rep.declared_pass();
    ctx.out << (ok ? "all declared conditions pass" : "a declared condition was falsified") << "\n";
    if (ctx.flags.out) {
        RunWriter w(c.out);
        w.write_table("tables/conditions.csv", {"condition", "declared", "result", "worst_margin"}, rows);
        json extra = solver_json(c);
        extra["samples"] = c.samples;
        extra["declared_pass"] = ok;
        w.finish("check-conditions", extra.dump());
    }
    return ok ? kExitOk : kExitFailure;
}

void write_diagnostics(const std::string& dir, const std::string& diagnostics) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream f(std::filesystem::path(dir) / "diagnostics.json", std::ios::trunc);
    if (f) f << diagnostics << "\n";
}

}  // namespace

int run(const std::string& command, const std::string& config_path, const Flags& flags, std::ostream& out,
        std::ostream& err) {
    std::string out_dir;
    try {
        if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
            err << "unknown command '" << command << "'\n";
            return kExitFailure;
        }
        RunConfig cfg = load_run_config(config_path);
        if (flags.out) cfg.out = *flags.out;
        if (flags.threads) {
            if (*flags.threads < 0) throw ConfigError("--threads", "must be >= 0");
            cfg.solver.threads = *flags.threads;
        }
        out_dir = cfg.out;
        Context ctx{cfg, build_model(cfg.model), flags, out, err};
        if (command == "solve-evolution") return solve_evolution(ctx);
        if (command == "solve-stationary") return solve_stationary(ctx);
        if (command == "fundamental-solution") return fundamental(ctx);
        if (command == "compare-formulas") return compare_formulas(ctx);
        if (command == "fd-solve") return fd_solve(ctx);
        if (command == "convergence-study") return convergence_study(ctx);
        return check_conditions_cmd(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        err << "non-convergence: " << e.what() << " (residual " << format_number(e.residual()) << ")\n"
            << e.diagnostics() << "\n";
        if (!out_dir.empty()) write_diagnostics(out_dir, e.diagnostics());
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace hj::cli
