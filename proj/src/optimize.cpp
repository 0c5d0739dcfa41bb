#include "hj/optimize.hpp"

#include <cmath>
#include <limits>

namespace hj {

BfgsResult minimize_bfgs(const ValueAndGradient& f, Eigen::VectorXd x0, const BfgsOptions& options,
                         const Eigen::MatrixXd& inverse_hessian0) {
    const Eigen::Index n = x0.size();
    BfgsResult r;
    r.x = std::move(x0);
    Eigen::VectorXd g(n);
    r.value = f(r.x, &g);
    r.evaluations = 1;
    r.grad_norm = n > 0 ? g.cwiseAbs().maxCoeff() : 0.0;
    if (n == 0 || r.grad_norm < options.grad_tol) {
        r.converged = true;
        return r;
    }
    Eigen::MatrixXd hinv = inverse_hessian0.size() == n * n ? inverse_hessian0 : Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g_next(n);
    Eigen::VectorXd x_next(n);
    constexpr double kArmijo = 1e-4;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    bool fresh = true;
    for (int it = 0; it < options.max_iterations; ++it) {
        Eigen::VectorXd p = -hinv * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            hinv.setIdentity();
            p = -g;
            slope = g.dot(p);
            fresh = true;
        }
        double alpha = 1.0;
        double f_next = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_next = r.x + alpha * p;
            f_next = f(x_next, &g_next);
            ++r.evaluations;
            if (std::isfinite(f_next) &&
                f_next <= r.value + kArmijo * alpha * slope + 4.0 * kEps * std::abs(r.value)) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (fresh) break;
            // Stale curvature information: restart from steepest descent once.
            hinv.setIdentity();
            fresh = true;
            continue;
        }
        const Eigen::VectorXd s = x_next - r.x;
        const Eigen::VectorXd y = g_next - g;
        r.x = x_next;
        r.value = f_next;
        g = g_next;
        r.iterations = it + 1;
        r.grad_norm = g.cwiseAbs().maxCoeff();
        if (r.grad_norm < options.grad_tol) {
            r.converged = true;
            return r;
        }
        const double sy = s.dot(y);
        if (sy > 1e-14 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = hinv * y;
            const double yhy = y.dot(hy);
            hinv += (rho * rho * yhy + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
            fresh = false;
        }
    }
    r.grad_norm = g.cwiseAbs().maxCoeff();
    r.converged = r.grad_norm < options.grad_tol;
    return r;
}

Eigen::MatrixXd regularized_inverse(Eigen::MatrixXd hessian) {
    const Eigen::Index n = hessian.rows();
    hessian = 0.5 * (hessian + hessian.transpose()).eval();
    const double scale = std::max(1e-300, hessian.diagonal().cwiseAbs().maxCoeff());
    double shift = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Eigen::MatrixXd shifted = hessian;
        shifted.diagonal().array() += shift;
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            const double min_pivot = llt.matrixLLT().diagonal().minCoeff();
            if (min_pivot > 1e-8 * std::sqrt(scale)) {
                return llt.solve(Eigen::MatrixXd::Identity(n, n));
            }
        }
        shift = shift == 0.0 ? 1e-6 * scale : shift * 10.0;
    }
    return {};
}

}  // namespace hj
