#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sparsear {

// Ordered real-valued samples. start_index records which process index the
// first sample corresponds to (bookkeeping only; no arithmetic depends on it).
struct TimeSeries {
    std::vector<double> values;
    long start_index = 1;

    std::size_t size() const { return values.size(); }
};

// Throws DataError if the series contains NaN/Inf.
void validate_finite(const TimeSeries& series);

// AR(p) model: x_k = theta_1*x_{k-1} + ... + theta_p*x_{k-p} + w_k,
// theta stored with lag 1 at index 0. sigma_w2 is the innovation variance.
struct ArModel {
    std::vector<double> theta;
    double sigma_w2 = 1.0;

    std::size_t order() const { return theta.size(); }
};

// Zero-mean innovation families, all sub-Gaussian; `scale` is the variance.
struct InnovationSpec {
    enum class Kind { gaussian, uniform, rademacher };
    Kind kind = Kind::gaussian;
    double scale = 1.0;
};

// True iff every root of the AR characteristic polynomial lies inside the
// unit circle (companion-matrix spectral radius < 1). Total on finite input.
bool is_stable(const std::vector<double>& theta);

// The simpler sufficient condition ||theta||_1 < 1.
bool sufficient_stable(const std::vector<double>& theta);

// Simulates n_total samples of the AR recursion after discarding burn_in
// initial samples (recursion starts from zero history). Deterministic in
// `seed`. Throws UnstableModel / InvalidLength.
TimeSeries simulate(const ArModel& model, const InnovationSpec& innovations, std::size_t n_total,
                    std::size_t burn_in, std::uint64_t seed);

inline std::size_t default_burn_in(std::size_t order) { return 10 * order; }

// Power spectral density at omega in [0, pi], including the 1/(2*pi) factor:
//   S(omega) = sigma_w2 / (2*pi*|1 - sum_l theta_l e^{-i*l*omega}|^2).
double psd(const ArModel& model, double omega);

// max/min of psd over a uniform grid of grid_size points on [0, pi]
// (endpoints included). A lower bound on the true sup/inf ratio.
double spectral_spread(const ArModel& model, std::size_t grid_size = 4096);

// Autocovariances r_0..r_max_lag: exact Yule-Walker solve for lags <= p,
// then the recursion r_k = sum_l theta_l r_{k-l}.
std::vector<double> theoretical_autocovariance(const ArModel& model, std::size_t max_lag);

// (sigma_s, varsigma_s): l1 and l2 norms of theta minus its best s-term
// approximation. Ties in magnitude keep the lowest index.
std::pair<double, double> compressibility(const std::vector<double>& theta, std::size_t s);

}  // namespace sparsear
