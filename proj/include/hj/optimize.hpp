#pragma once

#include <functional>

#include <Eigen/Dense>

namespace hj {

struct BfgsOptions {
    double grad_tol = 1e-6;
    int max_iterations = 200;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    /// Sup-norm of the gradient at x.
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Objective returning f(x) and, when `grad` is non-null, writing the gradient.
using ValueAndGradient = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

/// Dense BFGS on the inverse Hessian with Armijo backtracking. Converged means
/// ||grad||_inf < grad_tol. `inverse_hessian0` seeds the inverse Hessian (identity
/// when empty).
[[nodiscard]] BfgsResult minimize_bfgs(const ValueAndGradient& f, Eigen::VectorXd x0, const BfgsOptions& options,
                                       const Eigen::MatrixXd& inverse_hessian0 = Eigen::MatrixXd());

/// Inverse of a symmetric matrix after shifting it to positive definiteness.
/// Returns an empty matrix when no shift up to |diag|-scale succeeds.
[[nodiscard]] Eigen::MatrixXd regularized_inverse(Eigen::MatrixXd hessian);

}  // namespace hj
