#include "hj/caratheodory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "hj/detail/rk4.hpp"
#include "hj/errors.hpp"

namespace hj {

// ---------------------------------------------------------------------------
// Curve

Curve Curve::straight(const DomainDescriptor& domain, double t_start, double t_end, const Coord& x,
                      const Coord& y, int segments, std::array<int, kMaxDim> winding) {
    if (segments < 1) throw PreconditionError("curve needs at least one segment");
    if (!(t_end > t_start)) throw PreconditionError("curve time range must be increasing");
    Curve c;
    c.t_start = t_start;
    c.t_end = t_end;
    c.dimension = domain.dimension;
    const Coord start = domain.wrap(x);
    Coord disp = domain.nearest_displacement(start, domain.wrap(y));
    for (int a = 0; a < domain.dimension; ++a) disp[a] += winding[a] * domain.period[a];
    c.points.resize(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        c.points[i] = start + (static_cast<double>(i) / segments) * disp;
    }
    c.points.back() = start + disp;
    return c;
}

Coord Curve::position(double s) const {
    const double clamped = std::clamp(s, t_start, t_end);
    const double h = dt();
    int i = static_cast<int>(std::floor((clamped - t_start) / h));
    i = std::clamp(i, 0, segments() - 1);
    const double theta = (clamped - time(i)) / h;
    return (1.0 - theta) * points[i] + theta * points[i + 1];
}

std::array<long, kMaxDim> Curve::winding(int segment, const DomainDescriptor& domain) const {
    const auto a = domain.image_index(points[segment]);
    const auto b = domain.image_index(points[segment + 1]);
    return {b[0] - a[0], b[1] - a[1]};
}

void Curve::validate() const {
    if (points.size() < 2) throw PreconditionError("curve needs at least one segment");
    if (!(t_end > t_start) || !std::isfinite(t_start) || !std::isfinite(t_end)) {
        throw PreconditionError("curve time samples must be strictly increasing");
    }
    for (const auto& p : points) {
        if (!std::isfinite(p[0]) || !std::isfinite(p[1])) throw PreconditionError("curve node is not finite");
    }
}

Curve Curve::shifted(double shift) const {
    Curve c = *this;
    c.t_start += shift;
    c.t_end += shift;
    return c;
}

double CaratheodoryTrajectory::interpolate(double s) const {
    const double t0 = times.front();
    const double t1 = times.back();
    const double slack = 1e-9 * (1.0 + std::abs(t0) + std::abs(t1));
    if (s < t0 - slack || s > t1 + slack) {
        throw PreconditionError("trajectory does not cover time " + std::to_string(s));
    }
    if (s <= t0) return u_values.front();
    if (s >= t1) return u_values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), s);
    const auto k = static_cast<std::size_t>(it - times.begin());
    const double ta = times[k - 1];
    const double tb = times[k];
    const double w = (s - ta) / (tb - ta);
    return (1.0 - w) * u_values[k - 1] + w * u_values[k];
}

// ---------------------------------------------------------------------------
// ODE solves

namespace {

void check_inputs(const LagrangianModel& model, const Curve& curve, double u0, int substeps) {
    curve.validate();
    if (curve.dimension != model.dimension()) throw PreconditionError("curve and model dimensions differ");
    if (!std::isfinite(u0)) throw PreconditionError("initial value must be finite");
    if (substeps < 1) throw PreconditionError("substeps must be positive");
}

}  // namespace

CaratheodoryTrajectory solve_caratheodory(const LagrangianModel& model, const Curve& curve, double u0,
                                          int substeps) {
    check_inputs(model, curve, u0, substeps);
    return detail::integrate_full(detail::HerglotzRhs{&model}, curve, u0, substeps);
}

CaratheodoryTrajectory solve_linearized(const LagrangianModel& model, const Curve& eta,
                                        const CaratheodoryTrajectory& frozen, double u0, int substeps) {
    check_inputs(model, eta, u0, substeps);
    const double slack = 1e-9 * (1.0 + std::abs(eta.t_start) + std::abs(eta.t_end));
    if (frozen.times.empty() || frozen.times.front() > eta.t_start + slack ||
        frozen.times.back() < eta.t_end - slack) {
        throw PreconditionError("frozen trajectory does not cover the curve's time range");
    }
    return detail::integrate_full(detail::LinearizedRhs{&model, &frozen}, eta, u0, substeps);
}

// ---------------------------------------------------------------------------
// Gauges

Gauge gauge_constant(double c) {
    std::ostringstream name;
    name << "const:" << c;
    return {name.str(), [c](double, const Coord&, const Coord&, double, const LagrangianJet&) { return c; }};
}

Gauge gauge_sine(double amplitude, double frequency, double offset) {
    std::ostringstream name;
    name << "sin:" << amplitude << ":" << frequency;
    if (offset != 0.0) name << ":" << offset;
    return {name.str(), [=](double s, const Coord&, const Coord&, double, const LagrangianJet&) {
                return offset + amplitude * std::sin(2.0 * std::numbers::pi * frequency * s);
            }};
}

Gauge gauge_canonical() {
    return {"canonical", [](double, const Coord&, const Coord&, double, const LagrangianJet& j) { return j.du; }};
}

Gauge parse_gauge(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto number = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            const double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size() || !std::isfinite(v)) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw PreconditionError("malformed gauge '" + text + "'");
        }
    };
    if (parts.size() == 1 && parts[0] == "canonical") return gauge_canonical();
    if (parts.size() == 2 && parts[0] == "const") return gauge_constant(number(1));
    if ((parts.size() == 3 || parts.size() == 4) && parts[0] == "sin") {
        return gauge_sine(number(1), number(2), parts.size() == 4 ? number(3) : 0.0);
    }
    throw PreconditionError("unknown gauge '" + text + "'");
}

// ---------------------------------------------------------------------------
// Exponentially weighted quadratures

double exp_weighted_value(double u0, const std::vector<double>& rate, const std::vector<double>& source,
                          int segments, int substeps, double step, Quadrature rule) {
    const int m = substeps;
    const auto stride = static_cast<std::size_t>(m + 1);
    if (rate.size() != stride * segments || source.size() != rate.size()) {
        throw PreconditionError("weighted quadrature sample layout mismatch");
    }
    const bool simpson = rule == Quadrature::Simpson && m % 2 == 0;
    const double h = step;
    std::vector<double> cum(rate.size());
    double carry = 0.0;
    for (int i = 0; i < segments; ++i) {
        const double* r = &rate[i * stride];
        double* big_r = &cum[i * stride];
        big_r[0] = carry;
        for (int j = 1; j <= m; ++j) {
            if (!simpson) {
                big_r[j] = big_r[j - 1] + 0.5 * h * (r[j - 1] + r[j]);
            } else if (j % 2 == 1) {
                big_r[j] = big_r[j - 1] + h * (5.0 * r[j - 1] + 8.0 * r[j] - r[j + 1]) / 12.0;
            } else {
                big_r[j] = big_r[j - 2] + h / 3.0 * (r[j - 2] + 4.0 * r[j - 1] + r[j]);
            }
        }
        carry = big_r[m];
    }
    const double total = carry;
    double integral = 0.0;
    for (int i = 0; i < segments; ++i) {
        const double* g = &source[i * stride];
        const double* big_r = &cum[i * stride];
        auto f = [&](int j) { return std::exp(total - big_r[j]) * g[j]; };
        if (simpson) {
            double acc = f(0) + f(m);
            for (int j = 1; j < m; ++j) acc += (j % 2 == 1 ? 4.0 : 2.0) * f(j);
            integral += h / 3.0 * acc;
        } else {
            double acc = 0.5 * (f(0) + f(m));
            for (int j = 1; j < m; ++j) acc += f(j);
            integral += h * acc;
        }
    }
    return std::exp(total) * u0 + integral;
}

namespace {

/// Calls fn(s, x, v, u, index) for every sample of every segment, with the
/// segment's own velocity; boundary samples are visited once per segment.
template <typename Fn>
void for_each_sample(const CaratheodoryTrajectory& traj, Fn&& fn) {
    const Curve& c = traj.curve;
    const int m = traj.substeps();
    const double h = c.dt() / m;
    std::size_t idx = 0;
    for (int i = 0; i < c.segments(); ++i) {
        const Coord v = c.velocity(i);
        for (int j = 0; j <= m; ++j, ++idx) {
            const int k = i * m + j;
            const double s = traj.times[k];
            const Coord x = c.points[i] + (j * h) * v;
            fn(s, x, v, traj.u_values[k], idx);
        }
    }
}

std::size_t sample_count(const CaratheodoryTrajectory& traj) {
    return static_cast<std::size_t>(traj.curve.segments()) * (traj.substeps() + 1);
}

double finish(const CaratheodoryTrajectory& traj, const std::vector<double>& rate,
              const std::vector<double>& source, Quadrature rule) {
    return exp_weighted_value(traj.u0, rate, source, traj.curve.segments(), traj.substeps(),
                              traj.curve.dt() / traj.substeps(), rule);
}

constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

}  // namespace

double integrating_factor_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj,
                                Quadrature rule) {
    std::vector<double> rate(sample_count(traj));
    std::vector<double> source(rate.size());
    for_each_sample(traj, [&](double s, const Coord& x, const Coord& v, double u, std::size_t i) {
        const LagrangianJet j = model.jet(s, x, v, u);
        rate[i] = j.du;
        source[i] = j.value - u * j.du;
    });
    return finish(traj, rate, source, rule);
}

IntegratingFactorTerms integrating_factor_terms(const LagrangianModel& model, const CaratheodoryTrajectory& traj,
                                                Quadrature rule) {
    std::vector<double> rate(sample_count(traj));
    std::vector<double> source(rate.size());
    IntegratingFactorTerms out;
    out.max_rate = -std::numeric_limits<double>::infinity();
    for_each_sample(traj, [&](double s, const Coord& x, const Coord& v, double u, std::size_t i) {
        const LagrangianJet j = model.jet(s, x, v, u);
        rate[i] = j.du;
        source[i] = j.value - u * j.du;
        out.max_rate = std::max(out.max_rate, j.du);
    });
    const int segs = traj.curve.segments();
    const int m = traj.substeps();
    const double h = traj.curve.dt() / m;
    out.integral = exp_weighted_value(0.0, rate, source, segs, m, h, rule);
    const std::vector<double> zero(rate.size(), 0.0);
    out.factor = exp_weighted_value(1.0, rate, zero, segs, m, h, rule);
    return out;
}

double hatLu_splitting_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj, Quadrature rule) {
    std::vector<double> rate(sample_count(traj));
    std::vector<double> source(rate.size());
    for_each_sample(traj, [&](double s, const Coord& x, const Coord& v, double u, std::size_t i) {
        double mean = 0.0;
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double theta = 0.5 * (kGaussNodes[q] + 1.0);
            mean += 0.5 * kGaussWeights[q] * model.du(s, x, v, theta * u);
        }
        rate[i] = mean;
        source[i] = model.value(s, x, v, 0.0);
    });
    return finish(traj, rate, source, rule);
}

double gaugeF_splitting_value(const LagrangianModel& model, const CaratheodoryTrajectory& traj, const Gauge& gauge,
                              Quadrature rule) {
    std::vector<double> rate(sample_count(traj));
    std::vector<double> source(rate.size());
    for_each_sample(traj, [&](double s, const Coord& x, const Coord& v, double u, std::size_t i) {
        const LagrangianJet j = model.jet(s, x, v, u);
        const double f = gauge.fn(s, x, v, u, j);
        if (!std::isfinite(f)) {
            throw PreconditionError("gauge '" + gauge.name + "' is not finite at s=" + std::to_string(s));
        }
        rate[i] = f;
        source[i] = j.value - f * u;
    });
    return finish(traj, rate, source, rule);
}

double a_priori_bound(const LagrangianModel& model, const CaratheodoryTrajectory& traj) {
    std::vector<double> zero(sample_count(traj), 0.0);
    std::vector<double> source(zero.size());
    for_each_sample(traj, [&](double s, const Coord& x, const Coord& v, double, std::size_t i) {
        source[i] = std::abs(model.value(s, x, v, 0.0));
    });
    const double action = exp_weighted_value(0.0, zero, source, traj.curve.segments(), traj.substeps(),
                                             traj.curve.dt() / traj.substeps(), Quadrature::Simpson);
    const double span = traj.curve.t_end - traj.curve.t_start;
    return std::exp(model.constants().K * span) * (std::abs(traj.u0) + action);
}

void write_trajectory_csv(const CaratheodoryTrajectory& traj, const DomainDescriptor& domain,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    const int d = domain.dimension;
    out << "s";
    for (int a = 0; a < d; ++a) out << ",x" << a;
    for (int a = 0; a < d; ++a) out << ",v" << a;
    out << ",u\n";
    const Curve& c = traj.curve;
    const int m = traj.substeps();
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const int seg = std::min(static_cast<int>(k) / m, c.segments() - 1);
        const Coord x = domain.wrap(c.position(traj.times[k]));
        const Coord v = c.velocity(seg);
        put(traj.times[k]);
        for (int a = 0; a < d; ++a) {
            out << ',';
            put(x[a]);
        }
        for (int a = 0; a < d; ++a) {
            out << ',';
            put(v[a]);
        }
        out << ',';
        put(traj.u_values[k]);
        out << '\n';
    }
}

}  // namespace hj
