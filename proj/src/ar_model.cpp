#include "sparsear/ar_model.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "sparsear/errors.hpp"
#include "sparsear/kernels.hpp"
#include "sparsear/rng.hpp"

namespace sparsear {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError(std::string(what) + " contains NaN/Inf");
    }
}

void require_stable(const ArModel& model) {
    if (!is_stable(model.theta)) {
        throw UnstableModel("companion-matrix spectral radius >= 1");
    }
}

// |1 - sum_l theta_l e^{-i*l*omega}|^2 via a single complex Horner pass.
double char_poly_mag2(const std::vector<double>& theta, double omega) {
    const std::complex<double> z = std::polar(1.0, -omega);
    std::complex<double> acc(0.0, 0.0);
    for (auto it = theta.rbegin(); it != theta.rend(); ++it) {
        acc = (acc + *it) * z;
    }
    const std::complex<double> h = 1.0 - acc;
    return std::norm(h);
}

}  // namespace

void validate_finite(const TimeSeries& series) { require_finite(series.values, "series"); }

bool sufficient_stable(const std::vector<double>& theta) {
    double l1 = 0.0;
    for (double t : theta) l1 += std::abs(t);
    return l1 < 1.0;
}

bool is_stable(const std::vector<double>& theta) {
    require_finite(theta, "theta");
    const std::size_t p = theta.size();
    if (p == 0) return true;
    // Cheap sufficient check first; exact companion eigenvalues otherwise.
    if (sufficient_stable(theta)) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t j = 0; j < p; ++j) companion(0, j) = theta[j];
    for (std::size_t i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const auto eig = companion.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (std::abs(eig[i]) >= 1.0) return false;
    }
    return true;
}

TimeSeries simulate(const ArModel& model, const InnovationSpec& innovations, std::size_t n_total,
                    std::size_t burn_in, std::uint64_t seed) {
    if (n_total < 1) throw InvalidLength("simulate: n_total must be >= 1");
    if (innovations.scale <= 0.0) throw InvalidConfig("innovation scale must be positive");
    require_stable(model);

    const std::size_t p = model.order();
    Rng rng(seed);

    const double sd = std::sqrt(innovations.scale);
    const double half_width = std::sqrt(3.0 * innovations.scale);
    auto draw = [&]() -> double {
        switch (innovations.kind) {
            case InnovationSpec::Kind::gaussian:
                return sd * rng.gaussian();
            case InnovationSpec::Kind::uniform:
                return rng.uniform(-half_width, half_width);
            case InnovationSpec::Kind::rademacher:
                return sd * rng.rademacher();
        }
        return 0.0;
    };

    // Nonzero lags only; the recursion cost is O(s) per sample for sparse theta.
    std::vector<std::size_t> lags;
    for (std::size_t l = 0; l < p; ++l) {
        if (model.theta[l] != 0.0) lags.push_back(l + 1);
    }
    const bool dense = lags.size() > p / 4;
    std::vector<double> theta_rev(p);
    for (std::size_t j = 0; j < p; ++j) theta_rev[j] = model.theta[p - 1 - j];

    std::vector<double> buf(p + burn_in + n_total, 0.0);
    for (std::size_t k = p; k < buf.size(); ++k) {
        double acc = draw();
        if (dense) {
            acc += kernels::dot(theta_rev.data(), buf.data() + (k - p), p);
        } else {
            for (std::size_t l : lags) acc += model.theta[l - 1] * buf[k - l];
        }
        buf[k] = acc;
    }

    TimeSeries out;
    out.values.assign(buf.begin() + static_cast<long>(p + burn_in), buf.end());
    out.start_index = 1;
    return out;
}

double psd(const ArModel& model, double omega) {
    require_stable(model);
    return model.sigma_w2 / (2.0 * kPi * char_poly_mag2(model.theta, omega));
}

double spectral_spread(const ArModel& model, std::size_t grid_size) {
    if (grid_size < 64) throw InvalidConfig("spectral_spread: grid_size must be >= 64");
    require_stable(model);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t j = 0; j < grid_size; ++j) {
        const double omega = kPi * static_cast<double>(j) / static_cast<double>(grid_size - 1);
        const double m2 = char_poly_mag2(model.theta, omega);
        lo = std::min(lo, 1.0 / m2);
        hi = std::max(hi, 1.0 / m2);
    }
    return hi / lo;  // sigma_w2 and 1/(2*pi) cancel
}

std::vector<double> theoretical_autocovariance(const ArModel& model, std::size_t max_lag) {
    require_stable(model);
    const std::size_t p = model.order();
    const auto& th = model.theta;

    // Unknowns r_0..r_p. Row 0 encodes r_0 - sum_l theta_l r_l = sigma_w2;
    // row k encodes r_k - sum_l theta_l r_{|k-l|} = 0.
    const std::size_t dim = p + 1;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs[0] = model.sigma_w2;
    for (std::size_t k = 0; k <= p; ++k) {
        A(k, k) += 1.0;
        for (std::size_t l = 1; l <= p; ++l) {
            const std::size_t idx = (k >= l) ? k - l : l - k;
            A(k, idx) -= th[l - 1];
        }
    }
    Eigen::VectorXd r_head = A.partialPivLu().solve(rhs);

    std::vector<double> r(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= std::min(max_lag, p); ++k) r[k] = r_head[static_cast<long>(k)];
    for (std::size_t k = p + 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t l = 1; l <= p; ++l) acc += th[l - 1] * r[k - l];
        r[k] = acc;
    }
    return r;
}

std::pair<double, double> compressibility(const std::vector<double>& theta, std::size_t s) {
    if (s < 1 || s > theta.size()) throw InvalidConfig("compressibility: need 1 <= s <= p");
    std::vector<std::size_t> idx(theta.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(theta[a]) > std::abs(theta[b]);
    });
    double l1 = 0.0, l2sq = 0.0;
    for (std::size_t r = s; r < idx.size(); ++r) {
        const double v = theta[idx[r]];
        l1 += std::abs(v);
        l2sq += v * v;
    }
    return {l1, std::sqrt(l2sq)};
}

}  // namespace sparsear
