#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsear/ar_model.hpp"
#include "sparsear/estimators.hpp"
#include "sparsear/gof.hpp"

namespace sparsear {

// Regularization schedule for sweep cells: a fixed gamma, or the
// d2*sqrt(log p / n) rule evaluated per cell.
struct GammaPolicy {
    enum class Kind { fixed, auto_d2 };
    Kind kind = Kind::fixed;
    double value = 0.1;  // gamma itself, or d2

    static GammaPolicy fixed_gamma(double g) { return {Kind::fixed, g}; }
    static GammaPolicy auto_d2(double d2) { return {Kind::auto_d2, d2}; }

    double resolve(std::size_t n, std::size_t p) const;
};

struct SweepSpec {
    std::size_t p = 0;
    std::size_t s = 0;
    double eta = 0.5;
    std::vector<std::size_t> n_grid;  // design rows; a cell simulates n + p samples
    std::size_t seeds = 1;
    std::vector<Method> methods;
    GammaPolicy gamma_policy = GammaPolicy::fixed_gamma(0.1);
    std::optional<std::size_t> s_star;  // OMP budget; default max(s, ceil(s*ln s))
    double sigma_w2 = 1.0;
    std::uint64_t master_seed = 1;
    std::size_t workers = 1;
};

struct SweepRecord {
    Method method;
    std::size_t n = 0;
    std::size_t seed = 0;
    double mse = 0.0;  // ||theta_hat - theta||^2 / ||theta||^2; NaN when !ok
    bool ok = true;
    std::string error;
};

struct SweepSummaryRow {
    Method method;
    std::size_t n = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::size_t failures = 0;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRecord> records;  // ordered by (seed, n, method)
    std::vector<SweepSummaryRow> summary;
};

// Per-seed parameter draw: support uniform over size-s subsets, equal
// magnitudes (1-eta)/s, independent random signs, so ||theta||_1 = 1 - eta.
ArModel sweep_model(const SweepSpec& spec, std::size_t seed_index);

// The record a cell fits on: n + p samples, burn-in 10p, gaussian innovations.
TimeSeries sweep_series(const SweepSpec& spec, std::size_t seed_index, std::size_t n);

// Per-cell estimator configuration (gamma policy and OMP budget resolved).
EstimatorConfig sweep_config(const SweepSpec& spec, std::size_t n);

// Runs every (seed, n, method) cell; failures are recorded per cell and never
// abort the sweep. Deterministic in master_seed and independent of `workers`.
SweepResult run_sweep(const SweepSpec& spec);

struct ScalingPair {
    std::size_t n = 0;
    std::size_t n2 = 0;  // typically 2n
};

struct ScalingReport {
    std::vector<ScalingPair> pairs;
    std::vector<double> medians_lo;  // median l2 error at n
    std::vector<double> medians_hi;  // median l2 error at n2
    std::vector<double> ratios;      // medians_lo / medians_hi
    bool pass = false;               // every ratio within [1.2, 1.7]
};

// Median l2-error contraction of the lasso when n doubles, against the
// sqrt(n) law; theta draws are exactly s-sparse.
ScalingReport error_scaling_check(std::size_t p, std::size_t s, double eta,
                                  const std::vector<ScalingPair>& pairs, std::size_t seeds,
                                  const GammaPolicy& gamma_policy, std::uint64_t master_seed);

struct GofTableRow {
    std::string label;
    bool ok = true;
    std::string error;
    GofReport report;
    bool stable = false;
};

// Fits each method on fit_series, scores residual KS/CvM/AD on test_series
// with the null variance estimated on the fitting half, plus the spectral
// CvM of the fitted spectrum against the test periodogram. Per-row failures
// are annotated, not thrown. Passing a true model appends a reference row.
std::vector<GofTableRow> gof_table(const TimeSeries& fit_series, const TimeSeries& test_series,
                                   std::size_t p, const std::vector<Method>& methods,
                                   const EstimatorConfig& cfg, std::size_t grid,
                                   const ArModel* true_model = nullptr);

}  // namespace sparsear
