#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "sparsear/ar_model.hpp"

namespace sparsear {

// The n x p Toeplitz covariate matrix X plus the target vector, kept implicit
// over the source record of m = n + p samples (row i, column j reads sample
// m-2-i-j; the target entry for row i is sample m-1-i, newest first).
// X is never materialised for large n*p: the Gram matrix and correlation
// vector are produced at construction with O(n*p) kernel work plus an O(p^2)
// Toeplitz-shift recurrence. Instances are immutable after construction.
class DesignMatrix {
public:
    DesignMatrix(TimeSeries series, std::size_t p);

    std::size_t rows() const { return n_; }
    std::size_t order() const { return p_; }
    const TimeSeries& series() const { return series_; }

    double x(std::size_t i, std::size_t j) const { return series_.values[m_ - 2 - i - j]; }
    double target(std::size_t i) const { return series_.values[m_ - 1 - i]; }

    // X^T X (unnormalised).
    const Eigen::MatrixXd& gram() const { return gram_; }
    // X^T y (unnormalised).
    const Eigen::VectorXd& xty() const { return xty_; }
    // ||y||^2.
    double target_sq() const { return target_sq_; }

    Eigen::MatrixXd dense() const;
    Eigen::VectorXd target_vector() const;

private:
    TimeSeries series_;
    std::size_t p_ = 0;
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd xty_;
    double target_sq_ = 0.0;
};

DesignMatrix build_design(const TimeSeries& series, std::size_t p);

// Biased sample autocorrelations of a record of m = n + p samples, lags 0..p,
// every available product summed with the constant divisor n = m - p. The
// Toeplitz matrix assembled from a constant-divisor estimate is positive
// semidefinite.
struct EmpiricalCovariance {
    std::vector<double> r_hat;  // lags 0..p (p+1 entries)
    std::size_t p = 0;
    std::size_t n = 0;      // divisor, m - p
    std::size_t total = 0;  // m

    // p x p Toeplitz matrix with entries r_hat[|i-j|].
    Eigen::MatrixXd R_hat() const;
    // Right-hand side of the Yule-Walker system: lags 1..p.
    Eigen::VectorXd rhs() const;
};

EmpiricalCovariance empirical_covariance(const TimeSeries& series, std::size_t p);

// Result of the exhaustive restricted-eigenvalue scan.
struct ReReport {
    std::size_t s = 0;
    double lambda_min_s = 0.0;
    double lambda_max_s = 0.0;
    bool satisfied = false;
    std::size_t subsets_checked = 0;
};

// Extreme eigenvalues of (1/n) X_S^T X_S over all index sets S of size s.
// Eigenvalues within 1e-10 of zero are clamped to zero before the satisfied
// test. Throws TooLarge if choose(p, s) exceeds 1e6.
ReReport re_check_exhaustive(const DesignMatrix& dm, std::size_t s);

// Eigenvalue interval [sigma_w2/(8*pi), sigma_w2/(2*pi*eta^2)] valid for the
// 1/(2*pi)-normalised covariance of any model with ||theta||_1 <= 1 - eta.
// Throws NotSufficientlyStable if ||theta||_1 >= 1.
std::pair<double, double> true_covariance_interval(const ArModel& model);

}  // namespace sparsear
