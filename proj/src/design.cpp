#include "sparsear/design.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "sparsear/errors.hpp"
#include "sparsear/kernels.hpp"

namespace sparsear {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

DesignMatrix::DesignMatrix(TimeSeries series, std::size_t p)
    : series_(std::move(series)), p_(p), m_(series_.values.size()) {
    if (p_ < 1) throw InvalidConfig("design: order p must be >= 1");
    if (m_ <= p_) throw TooShort("design: need at least p + 1 samples");
    validate_finite(series_);
    n_ = m_ - p_;

    const double* v = series_.values.data();
    // Exact dots along the first row, then the Toeplitz-shift recurrence
    // G[j+1][k+1] = G[j][k] - v[m-2-j]v[m-2-k] + v[m-2-n-j]v[m-2-n-k]
    // fills the interior in O(p^2).
    gram_.resize(p_, p_);
    for (std::size_t k = 0; k < p_; ++k) {
        gram_(0, k) = kernels::dot(v + (m_ - 1 - n_), v + (m_ - 1 - n_ - k), n_);
        gram_(k, 0) = gram_(0, k);
    }
    for (std::size_t j = 1; j < p_; ++j) {
        for (std::size_t k = j; k < p_; ++k) {
            const std::size_t a = j - 1, b = k - 1;
            const double upd = gram_(a, b) - v[m_ - 2 - a] * v[m_ - 2 - b] +
                               v[m_ - 2 - n_ - a] * v[m_ - 2 - n_ - b];
            gram_(j, k) = upd;
            gram_(k, j) = upd;
        }
    }

    xty_.resize(p_);
    for (std::size_t j = 0; j < p_; ++j) {
        xty_[static_cast<long>(j)] = kernels::dot(v + (m_ - 1 - n_ - j), v + (m_ - n_), n_);
    }
    target_sq_ = kernels::dot(v + (m_ - n_), v + (m_ - n_), n_);
}

DesignMatrix build_design(const TimeSeries& series, std::size_t p) {
    return DesignMatrix(series, p);
}

Eigen::MatrixXd DesignMatrix::dense() const {
    Eigen::MatrixXd X(n_, p_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < p_; ++j) X(i, j) = x(i, j);
    }
    return X;
}

Eigen::VectorXd DesignMatrix::target_vector() const {
    Eigen::VectorXd y(n_);
    for (std::size_t i = 0; i < n_; ++i) y[static_cast<long>(i)] = target(i);
    return y;
}

EmpiricalCovariance empirical_covariance(const TimeSeries& series, std::size_t p) {
    if (p < 1) throw InvalidConfig("empirical_covariance: order p must be >= 1");
    const std::size_t m = series.values.size();
    if (m <= p) throw TooShort("empirical_covariance: need at least p + 1 samples");
    validate_finite(series);

    EmpiricalCovariance ec;
    ec.p = p;
    ec.total = m;
    ec.n = m - p;
    ec.r_hat.resize(p + 1);
    const double* v = series.values.data();
    const double inv_n = 1.0 / static_cast<double>(ec.n);
    for (std::size_t k = 0; k <= p; ++k) {
        ec.r_hat[k] = kernels::dot(v, v + k, m - k) * inv_n;
    }
    return ec;
}

Eigen::MatrixXd EmpiricalCovariance::R_hat() const {
    Eigen::MatrixXd R(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            R(i, j) = r_hat[i >= j ? i - j : j - i];
        }
    }
    return R;
}

Eigen::VectorXd EmpiricalCovariance::rhs() const {
    Eigen::VectorXd r(p);
    for (std::size_t k = 1; k <= p; ++k) r[static_cast<long>(k - 1)] = r_hat[k];
    return r;
}

ReReport re_check_exhaustive(const DesignMatrix& dm, std::size_t s) {
    const std::size_t p = dm.order();
    if (s < 1 || s > p) throw InvalidConfig("re_check: need 1 <= s <= p");

    double count = 1.0;
    for (std::size_t i = 0; i < s; ++i) {
        count *= static_cast<double>(p - i) / static_cast<double>(i + 1);
        if (count > 1e6) throw TooLarge("re_check: choose(p, s) exceeds 1e6 subsets");
    }

    const Eigen::MatrixXd& g = dm.gram();
    const double inv_n = 1.0 / static_cast<double>(dm.rows());

    ReReport rep;
    rep.s = s;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t checked = 0;

    std::vector<std::size_t> idx(s);
    for (std::size_t i = 0; i < s; ++i) idx[i] = i;
    Eigen::MatrixXd sub(s, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    while (true) {
        for (std::size_t a = 0; a < s; ++a) {
            for (std::size_t b = 0; b < s; ++b) sub(a, b) = g(idx[a], idx[b]) * inv_n;
        }
        eig.compute(sub, Eigen::EigenvaluesOnly);
        lo = std::min(lo, eig.eigenvalues().minCoeff());
        hi = std::max(hi, eig.eigenvalues().maxCoeff());
        ++checked;

        // next lexicographic combination
        std::size_t i = s;
        while (i > 0 && idx[i - 1] == p - s + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }

    if (std::abs(lo) < 1e-10) lo = 0.0;
    if (std::abs(hi) < 1e-10) hi = 0.0;
    rep.lambda_min_s = lo;
    rep.lambda_max_s = hi;
    rep.satisfied = lo > 0.0;
    rep.subsets_checked = checked;
    return rep;
}

std::pair<double, double> true_covariance_interval(const ArModel& model) {
    double l1 = 0.0;
    for (double t : model.theta) l1 += std::abs(t);
    if (!(l1 < 1.0)) {
        throw NotSufficientlyStable("true_covariance_interval: ||theta||_1 >= 1");
    }
    const double eta = 1.0 - l1;
    return {model.sigma_w2 / (8.0 * kPi), model.sigma_w2 / (2.0 * kPi * eta * eta)};
}

}  // namespace sparsear
