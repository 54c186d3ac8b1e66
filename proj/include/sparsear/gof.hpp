#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sparsear/ar_model.hpp"

namespace sparsear {

// Hypothesized innovation distribution F0. Gaussian is the only family the
// experiments need; mean/variance are explicit so tests can pin them.
struct NullCdf {
    double mean = 0.0;
    double variance = 1.0;

    double operator()(double x) const;
};

// Estimated innovations e_k = x_k - theta'x_{k-p}^{k-1} plus the null F0 the
// statistics compare against.
struct ResidualSeries {
    std::vector<double> residuals;
    NullCdf null_cdf;

    ResidualSeries with_null(NullCdf cdf) const {
        ResidualSeries out = *this;
        out.null_cdf = cdf;
        return out;
    }
};

// Residuals for every index with a full p-lag history. The default null is
// Normal(0, sample variance of these residuals); cross-validation protocols
// override it with the fitting-half variance via with_null().
ResidualSeries residuals(const TimeSeries& series, const ArModel& model);

double sample_variance(const std::vector<double>& v);

struct GofReport {
    double ks = 0.0;    // K_n
    double cvm = 0.0;   // n*C_n
    double ad = 0.0;    // n*A_n
    std::optional<double> scvm;
};

double ks_statistic(const ResidualSeries& rs);

double cvm_statistic(const ResidualSeries& rs);

// The paper's display pairs log F0(e_i) with log(1 - F0(e_i)) at the same
// sorted index; the standard Anderson-Darling form pairs index i with
// n+1-i. They agree on symmetric samples. Default is the standard form.
enum class AdFormula { standard, paired };

double ad_statistic(const ResidualSeries& rs, AdFormula formula = AdFormula::standard);

// Periodogram (1/(2*pi*n))|sum_k x_k e^{-i w k}|^2 on `grid` uniform points
// spanning [0, pi] endpoints included; integral over [-pi, pi] matches the
// mean square of the record.
std::vector<double> periodogram(const TimeSeries& series, std::size_t grid);

// Spectral Cramer-von Mises statistic: with both spectra normalised to unit
// integral on [0, pi], Z_n(w) = sqrt(n)*2*int_0^w (S_hat - S_model) and
// SC_n = (1/pi) int_0^pi Z_n(w)^2 dw, all integrals by trapezoid on the grid.
double scvm_statistic(const TimeSeries& series, const ArModel& model, std::size_t grid);

// Grid-level core of scvm_statistic, exposed for direct checks on spectra.
double scvm_from_spectra(const std::vector<double>& s_hat, const std::vector<double>& s_model,
                         std::size_t n_samples);

}  // namespace sparsear
