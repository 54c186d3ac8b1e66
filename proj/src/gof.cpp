#include "sparsear/gof.hpp"

#include <algorithm>
#include <cmath>

#include "sparsear/errors.hpp"
#include "sparsear/kernels.hpp"

namespace sparsear {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kCdfClamp = 1e-12;

std::vector<double> sorted_pit(const ResidualSeries& rs) {
    std::vector<double> u(rs.residuals.size());
    std::vector<double> e = rs.residuals;
    std::sort(e.begin(), e.end());
    for (std::size_t i = 0; i < e.size(); ++i) u[i] = rs.null_cdf(e[i]);
    return u;
}

double trapz(const std::vector<double>& f, double h) {
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * h;
}

}  // namespace

double NullCdf::operator()(double x) const {
    const double sd = std::sqrt(variance);
    return 0.5 * std::erfc(-(x - mean) / (sd * 1.4142135623730950488016887242097));
}

double sample_variance(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

ResidualSeries residuals(const TimeSeries& series, const ArModel& model) {
    const std::size_t p = model.order();
    const std::size_t m = series.values.size();
    if (m < p + 1) throw TooShort("residuals: need at least p + 1 samples");
    validate_finite(series);

    const double* v = series.values.data();
    std::vector<double> theta_rev(p);
    for (std::size_t j = 0; j < p; ++j) theta_rev[j] = model.theta[p - 1 - j];

    ResidualSeries rs;
    rs.residuals.resize(m - p);
    for (std::size_t t = p; t < m; ++t) {
        rs.residuals[t - p] = v[t] - kernels::dot(theta_rev.data(), v + (t - p), p);
    }
    rs.null_cdf = NullCdf{0.0, std::max(sample_variance(rs.residuals), 1e-300)};
    return rs;
}

double ks_statistic(const ResidualSeries& rs) {
    const std::size_t n = rs.residuals.size();
    if (n < 2) throw TooShort("ks_statistic: need at least 2 residuals");
    const std::vector<double> u = sorted_pit(rs);
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double ui = u[i - 1];
        const double hi = std::abs(static_cast<double>(i) / static_cast<double>(n) - ui);
        const double lo = std::abs(static_cast<double>(i - 1) / static_cast<double>(n) - ui);
        worst = std::max({worst, hi, lo});
    }
    return worst;
}

double cvm_statistic(const ResidualSeries& rs) {
    const std::size_t n = rs.residuals.size();
    if (n < 2) throw TooShort("cvm_statistic: need at least 2 residuals");
    const std::vector<double> u = sorted_pit(rs);
    double acc = 1.0 / (12.0 * static_cast<double>(n));
    for (std::size_t i = 1; i <= n; ++i) {
        const double q = (2.0 * static_cast<double>(i) - 1.0) / (2.0 * static_cast<double>(n));
        acc += (u[i - 1] - q) * (u[i - 1] - q);
    }
    return acc;
}

double ad_statistic(const ResidualSeries& rs, AdFormula formula) {
    const std::size_t n = rs.residuals.size();
    if (n < 2) throw TooShort("ad_statistic: need at least 2 residuals");
    std::vector<double> u = sorted_pit(rs);
    for (double& x : u) x = std::clamp(x, kCdfClamp, 1.0 - kCdfClamp);
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double w = 2.0 * static_cast<double>(i) - 1.0;
        const double partner = (formula == AdFormula::standard) ? u[n - i] : u[i - 1];
        acc += w * (std::log(u[i - 1]) + std::log1p(-partner));
    }
    return -static_cast<double>(n) - acc / static_cast<double>(n);
}

std::vector<double> periodogram(const TimeSeries& series, std::size_t grid) {
    const std::size_t n = series.values.size();
    if (n < 2) throw TooShort("periodogram: need at least 2 samples");
    if (grid < 2) throw InvalidConfig("periodogram: grid must be >= 2");
    validate_finite(series);

    std::vector<double> out(grid);
    const double* x = series.values.data();
    const double norm = 1.0 / (2.0 * kPi * static_cast<double>(n));
    for (std::size_t j = 0; j < grid; ++j) {
        const double omega = kPi * static_cast<double>(j) / static_cast<double>(grid - 1);
        double c = 0.0, s = 0.0;
        kernels::dft_bin(x, n, omega, &c, &s);
        out[j] = (c * c + s * s) * norm;
    }
    return out;
}

double scvm_from_spectra(const std::vector<double>& s_hat, const std::vector<double>& s_model,
                         std::size_t n_samples) {
    if (s_hat.size() != s_model.size() || s_hat.size() < 2) {
        throw InvalidConfig("scvm: spectra must share a grid of >= 2 points");
    }
    const std::size_t g = s_hat.size();
    const double h = kPi / static_cast<double>(g - 1);

    const double ih = trapz(s_hat, h);
    const double im = trapz(s_model, h);
    if (!(ih > 0.0) || !(im > 0.0)) throw InvalidConfig("scvm: spectra must have positive mass");

    // Z(w) = sqrt(n)*2*int_0^w (normalized difference), cumulative trapezoid.
    const double scale = 2.0 * std::sqrt(static_cast<double>(n_samples));
    std::vector<double> z2(g);
    double cum = 0.0;
    double prev = s_hat[0] / ih - s_model[0] / im;
    z2[0] = 0.0;
    for (std::size_t j = 1; j < g; ++j) {
        const double cur = s_hat[j] / ih - s_model[j] / im;
        cum += 0.5 * h * (prev + cur);
        prev = cur;
        const double zj = scale * cum;
        z2[j] = zj * zj;
    }
    return trapz(z2, h) / kPi;
}

double scvm_statistic(const TimeSeries& series, const ArModel& model, std::size_t grid) {
    if (series.values.size() < 64) throw TooShort("scvm_statistic: need at least 64 samples");
    if (!is_stable(model.theta)) throw UnstableModel("scvm_statistic: unstable model");
    const std::vector<double> s_hat = periodogram(series, grid);
    std::vector<double> s_model(grid);
    for (std::size_t j = 0; j < grid; ++j) {
        const double omega = kPi * static_cast<double>(j) / static_cast<double>(grid - 1);
        s_model[j] = psd(model, omega);
    }
    return scvm_from_spectra(s_hat, s_model, series.values.size());
}

}  // namespace sparsear
