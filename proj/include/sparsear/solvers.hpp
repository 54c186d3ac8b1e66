#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "sparsear/design.hpp"

namespace sparsear {

struct SolverOptions {
    std::size_t max_iter = 100000;
    double tol = 1e-8;  // relative objective-decrease stopping threshold
    enum class StepPolicy { fixed, backtracking };
    StepPolicy step_policy = StepPolicy::fixed;
};

// Outcome of an iterative solve. `converged == false` means max_iter was hit
// with the relative decrease still above tol; the best iterate is returned
// regardless.
struct SolveStatus {
    bool converged = true;
    std::size_t iterations = 0;
    double objective = 0.0;
};

struct LassoResult {
    std::vector<double> theta;
    SolveStatus status;
    std::vector<double> objective_trace;  // one entry per sweep
};

// Minimises (1/n)||y - X theta||_2^2 + gamma*||theta||_1 by cyclic coordinate
// descent with covariance (Gram) updates; gamma = 0 is allowed and reduces to
// plain least squares.
LassoResult lasso_quadratic(const DesignMatrix& dm, double gamma, const SolverOptions& opts = {});

struct KktReport {
    double max_violation = 0.0;
    std::vector<std::size_t> active_set;
    bool stationarity_ok = false;
    double tolerance = 0.0;
};

// Subgradient stationarity certificate for the lasso objective at theta_hat:
// with g = (2/n) X^T (X theta_hat - y), the violation at coordinate j is
// |g_j + gamma*sign(theta_j)| when theta_j != 0 and max(0, |g_j| - gamma)
// otherwise.
KktReport kkt_check(const DesignMatrix& dm, const std::vector<double>& theta_hat, double gamma,
                    double tol);

// Least squares restricted to `support` (all other coordinates zero).
// Throws RankDeficient if the support Gram submatrix has condition number
// above 1e12.
std::vector<double> restricted_ls(const DesignMatrix& dm, const std::vector<std::size_t>& support);

enum class PenalizedNormKind { l2, l1 };

struct PenalizedNormResult {
    std::vector<double> theta;
    SolveStatus status;
    double duality_gap = -1.0;  // reported for the l1 (LP) kind
};

// Minimises ||R theta - r||_2 + gamma*||theta||_1   (kind == l2; norm NOT
// squared; ADMM with a projection-onto-ball prox), or
//           ||R theta - r||_1 + gamma*||theta||_1   (kind == l1; primal-dual
// interior point on the LP reformulation min 1't + gamma*1'u subject to
// +-(R theta - r) <= t, +-theta <= u, reduced to p x p solves).
PenalizedNormResult penalized_norm_solve(const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                                         double gamma, PenalizedNormKind kind,
                                         const SolverOptions& opts = {});

}  // namespace sparsear
