#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparsear/ar_model.hpp"
#include "sparsear/design.hpp"
#include "sparsear/solvers.hpp"

namespace sparsear {

enum class Method { ls, yw, burg, lasso, yw_l21, yw_l11, omp, ywomp };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

enum class StabilityPolicy { reject, warn, project_l1 };

struct EstimatorConfig {
    std::optional<double> gamma;        // empty = auto via d2*sqrt(log p / n)
    double d2_constant = 0.15;
    std::optional<std::size_t> s_star;  // empty = auto via 4*rho*s*log(20*rho*s)
    std::optional<std::size_t> sparsity;   // s for the auto s_star schedule
    std::optional<double> rho_hint;        // spectral spread; pilot YW fit if absent
    StabilityPolicy stability_policy = StabilityPolicy::warn;
    SolverOptions solver;
};

struct FitDiagnostics {
    std::optional<KktReport> kkt;
    SolveStatus solver_status;
    bool underdetermined = false;
    bool projected = false;
    std::size_t s_star_used = 0;
    double gamma_used = 0.0;
    std::vector<std::size_t> selected;  // OMP support in selection order
    std::string note;
};

struct FitResult {
    ArModel model;
    Method method = Method::ls;
    bool stable = false;
    FitDiagnostics diagnostics;
};

// Unconstrained least squares via the normal equations (ridge jitter 1e-10
// relative if near-singular); minimum-norm solution when n < p, flagged in
// diagnostics. Stability checked post hoc.
FitResult fit_ls(const DesignMatrix& dm);

// Yule-Walker solve by Levinson-Durbin; stable by construction on the biased
// autocorrelation estimate.
FitResult fit_yule_walker(const EmpiricalCovariance& ec);

// Burg lattice recursion; reflection coefficients in (-1, 1), hence stable.
FitResult fit_burg(const TimeSeries& series, std::size_t p);

FitResult fit_lasso(const DesignMatrix& dm, const EstimatorConfig& cfg);

enum class OmpObjective { ls_loss, yw_loss };

// Generalized orthogonal matching pursuit: repeatedly add the coordinate with
// the largest gradient magnitude, then refit on the grown support (restricted
// least squares for ls_loss; restricted normal equations on R_hat for
// yw_loss, whose selection gradient uses the smooth half-squared objective).
FitResult fit_omp(const DesignMatrix& dm, const EstimatorConfig& cfg, OmpObjective objective);

FitResult fit_yw_penalized(const EmpiricalCovariance& ec, const EstimatorConfig& cfg,
                           PenalizedNormKind kind);

// d2 * sqrt(log(p)/n), natural log.
double auto_gamma(std::size_t n, std::size_t p, double d2);

// ceil(4*rho*s*log(20*rho*s)), natural log.
std::size_t auto_s_star(std::size_t s, double rho);

// Convenience front end used by the CLI and the bench harness: builds the
// objects `method` needs from a raw record.
FitResult fit(const TimeSeries& series, std::size_t p, Method method, const EstimatorConfig& cfg);

}  // namespace sparsear
