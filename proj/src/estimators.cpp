#include "sparsear/estimators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "sparsear/errors.hpp"
#include "sparsear/kernels.hpp"

namespace sparsear {

namespace {

constexpr double kSigmaFloor = 1e-30;

double residual_mean_square(const DesignMatrix& dm, const Eigen::VectorXd& theta) {
    // (1/n) * (||y||^2 - 2 theta'q + theta'G theta)
    const double n = static_cast<double>(dm.rows());
    const double quad = theta.dot(dm.gram() * theta);
    const double val = (dm.target_sq() - 2.0 * theta.dot(dm.xty()) + quad) / n;
    return std::max(val, kSigmaFloor);
}

void apply_stability_policy(FitResult& fit, StabilityPolicy policy) {
    fit.stable = is_stable(fit.model.theta);
    if (fit.stable) return;
    switch (policy) {
        case StabilityPolicy::warn:
            break;
        case StabilityPolicy::reject:
            throw UnstableModel("estimate is unstable and stability_policy is reject");
        case StabilityPolicy::project_l1: {
            double l1 = 0.0;
            for (double t : fit.model.theta) l1 += std::abs(t);
            if (l1 > 0.0) {
                const double scale = (1.0 - 1e-3) / l1;
                for (double& t : fit.model.theta) t *= scale;
            }
            fit.diagnostics.projected = true;
            fit.stable = is_stable(fit.model.theta);
            break;
        }
    }
}

double resolve_gamma(const EstimatorConfig& cfg, std::size_t n, std::size_t p) {
    if (cfg.gamma) return *cfg.gamma;
    if (!(cfg.d2_constant > 0.0)) throw InvalidConfig("auto gamma requires d2_constant > 0");
    return auto_gamma(n, p, cfg.d2_constant);
}

// Restricted normal-equation solve on (H, c): zero off support, H_SS t = c_S
// on it. Same conditioning contract as restricted_ls.
std::vector<double> restricted_quadratic(const Eigen::MatrixXd& H, const Eigen::VectorXd& c,
                                         const std::vector<std::size_t>& support) {
    std::vector<double> theta(H.cols(), 0.0);
    if (support.empty()) return theta;
    const std::size_t s = support.size();
    Eigen::MatrixXd hs(s, s);
    Eigen::VectorXd cs(s);
    for (std::size_t a = 0; a < s; ++a) {
        cs[a] = c[static_cast<long>(support[a])];
        for (std::size_t b = 0; b < s; ++b) hs(a, b) = H(support[a], support[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hs);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12) {
        throw RankDeficient("omp refit: support Gram condition number above 1e12");
    }
    Eigen::VectorXd sol =
        eig.eigenvectors() *
        (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * cs));
    for (std::size_t a = 0; a < s; ++a) theta[support[a]] = sol[a];
    return theta;
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::ls: return "ls";
        case Method::yw: return "yw";
        case Method::burg: return "burg";
        case Method::lasso: return "lasso";
        case Method::yw_l21: return "ywl21";
        case Method::yw_l11: return "ywl11";
        case Method::omp: return "omp";
        case Method::ywomp: return "ywomp";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "ls") return Method::ls;
    if (name == "yw") return Method::yw;
    if (name == "burg") return Method::burg;
    if (name == "lasso") return Method::lasso;
    if (name == "ywl21" || name == "yw_l21") return Method::yw_l21;
    if (name == "ywl11" || name == "yw_l11") return Method::yw_l11;
    if (name == "omp") return Method::omp;
    if (name == "ywomp") return Method::ywomp;
    return std::nullopt;
}

double auto_gamma(std::size_t n, std::size_t p, double d2) {
    if (p < 2) throw InvalidConfig("auto_gamma: p must be >= 2");
    if (n < 1) throw InvalidConfig("auto_gamma: n must be >= 1");
    if (!(d2 > 0.0)) throw InvalidConfig("auto_gamma: d2 must be positive");
    return d2 * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

std::size_t auto_s_star(std::size_t s, double rho) {
    if (s < 1) throw InvalidConfig("auto_s_star: s must be >= 1");
    if (!(rho >= 1.0)) throw InvalidConfig("auto_s_star: rho must be >= 1");
    const double v = 4.0 * rho * static_cast<double>(s) * std::log(20.0 * rho * static_cast<double>(s));
    return static_cast<std::size_t>(std::ceil(v));
}

FitResult fit_ls(const DesignMatrix& dm) {
    const std::size_t p = dm.order();
    const std::size_t n = dm.rows();
    FitResult out;
    out.method = Method::ls;

    Eigen::VectorXd theta;
    if (n < p) {
        // Minimum-norm solution of the underdetermined system.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dm.dense());
        theta = cod.solve(dm.target_vector());
        out.diagnostics.underdetermined = true;
    } else {
        const Eigen::MatrixXd& G = dm.gram();
        const Eigen::VectorXd& q = dm.xty();
        Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
        theta = ldlt.solve(q);
        const double scale = std::max(1.0, q.norm());
        if (!theta.allFinite() || (G * theta - q).norm() > 1e-8 * scale) {
            const double jit = 1e-10 * std::max(1.0, G.trace() / static_cast<double>(p));
            Eigen::MatrixXd Gj = G;
            Gj.diagonal().array() += jit;
            theta = Gj.ldlt().solve(q);
            out.diagnostics.note = "near-singular normal equations; ridge jitter applied";
        }
    }

    out.model.theta.assign(theta.data(), theta.data() + p);
    out.model.sigma_w2 = residual_mean_square(dm, theta);
    out.stable = is_stable(out.model.theta);
    return out;
}

FitResult fit_yule_walker(const EmpiricalCovariance& ec) {
    const std::size_t p = ec.p;
    const auto& r = ec.r_hat;
    FitResult out;
    out.method = Method::yw;

    // Levinson-Durbin on lags 0..p.
    std::vector<double> phi(p + 1, 0.0), prev(p + 1, 0.0);
    double e = r[0];
    if (e <= 0.0) e = kSigmaFloor;
    for (std::size_t m = 1; m <= p; ++m) {
        double acc = r[m];
        for (std::size_t l = 1; l < m; ++l) acc -= prev[l] * r[m - l];
        const double k = acc / e;
        phi[m] = k;
        for (std::size_t l = 1; l < m; ++l) phi[l] = prev[l] - k * prev[m - l];
        e *= (1.0 - k * k);
        if (e <= 0.0) e = kSigmaFloor;
        std::copy(phi.begin(), phi.begin() + static_cast<long>(m) + 1, prev.begin());
    }

    out.model.theta.assign(phi.begin() + 1, phi.end());
    // Undo the divisor-n inflation of the constant-divisor estimate.
    const double deflate = static_cast<double>(ec.n) / static_cast<double>(ec.total);
    out.model.sigma_w2 = std::max(e * deflate, kSigmaFloor);
    out.stable = is_stable(out.model.theta);
    return out;
}

FitResult fit_burg(const TimeSeries& series, std::size_t p) {
    const std::size_t N = series.values.size();
    if (N <= p) throw TooShort("burg: need at least p + 1 samples");
    validate_finite(series);
    FitResult out;
    out.method = Method::burg;

    std::vector<double> f = series.values;
    std::vector<double> b = series.values;
    std::vector<double> theta(p + 1, 0.0), prev(p + 1, 0.0);
    double e = kernels::dot(f.data(), f.data(), N) / static_cast<double>(N);

    for (std::size_t m = 1; m <= p; ++m) {
        const std::size_t len = N - m;
        const double num = kernels::dot(f.data() + m, b.data(), len);
        const double den = kernels::dot(f.data() + m, f.data() + m, len) +
                           kernels::dot(b.data(), b.data(), len);
        const double k = (den > 0.0) ? 2.0 * num / den : 0.0;
        kernels::lattice_step(k, f.data() + m, b.data(), len);
        theta[m] = k;
        for (std::size_t l = 1; l < m; ++l) theta[l] = prev[l] - k * prev[m - l];
        e *= (1.0 - k * k);
        std::copy(theta.begin(), theta.begin() + static_cast<long>(m) + 1, prev.begin());
    }

    out.model.theta.assign(theta.begin() + 1, theta.end());
    out.model.sigma_w2 = std::max(e, kSigmaFloor);
    out.stable = is_stable(out.model.theta);
    return out;
}

FitResult fit_lasso(const DesignMatrix& dm, const EstimatorConfig& cfg) {
    const double gamma = resolve_gamma(cfg, dm.rows(), dm.order());
    LassoResult sol = lasso_quadratic(dm, gamma, cfg.solver);

    FitResult out;
    out.method = Method::lasso;
    out.model.theta = sol.theta;
    out.diagnostics.solver_status = sol.status;
    out.diagnostics.gamma_used = gamma;
    out.diagnostics.kkt = kkt_check(dm, sol.theta, gamma, 1e-6);
    Eigen::Map<const Eigen::VectorXd> th(sol.theta.data(), static_cast<long>(sol.theta.size()));
    out.model.sigma_w2 = residual_mean_square(dm, th);
    apply_stability_policy(out, cfg.stability_policy);
    return out;
}

FitResult fit_omp(const DesignMatrix& dm, const EstimatorConfig& cfg, OmpObjective objective) {
    const std::size_t p = dm.order();
    const std::size_t n = dm.rows();
    FitResult out;
    out.method = (objective == OmpObjective::ls_loss) ? Method::omp : Method::ywomp;

    std::size_t s_star;
    if (cfg.s_star) {
        s_star = *cfg.s_star;
        if (s_star > n) throw InvalidConfig("omp: s_star exceeds the number of rows");
    } else {
        if (!cfg.sparsity) throw InvalidConfig("omp: auto s_star needs a sparsity budget");
        double rho;
        if (cfg.rho_hint) {
            rho = *cfg.rho_hint;
        } else {
            // Pilot Yule-Walker fit supplies the spectral-spread estimate.
            const FitResult pilot = fit_yule_walker(empirical_covariance(dm.series(), p));
            rho = std::max(1.0, spectral_spread(pilot.model));
            out.diagnostics.note = "rho from pilot yw fit";
        }
        s_star = auto_s_star(*cfg.sparsity, rho);
        s_star = std::min(s_star, n);
    }
    s_star = std::min(s_star, p);
    out.diagnostics.s_star_used = s_star;

    // Quadratic surrogate (H, c): gradient H*theta - c, refit on (H, c).
    Eigen::MatrixXd H;
    Eigen::VectorXd c;
    if (objective == OmpObjective::ls_loss) {
        H = dm.gram() / static_cast<double>(n);
        c = dm.xty() / static_cast<double>(n);
    } else {
        const EmpiricalCovariance ec = empirical_covariance(dm.series(), p);
        const Eigen::MatrixXd R = ec.R_hat();
        H = R.transpose() * R;
        c = R.transpose() * ec.rhs();
    }

    std::vector<std::size_t> support;
    std::vector<char> in_support(p, 0);
    std::vector<double> theta(p, 0.0);
    Eigen::VectorXd grad = -c;

    for (std::size_t it = 0; it < s_star; ++it) {
        std::size_t best = p;
        double best_mag = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            if (in_support[j]) continue;
            const double mag = std::abs(grad[static_cast<long>(j)]);
            if (mag > best_mag) {
                best_mag = mag;
                best = j;
            }
        }
        if (best == p || best_mag == 0.0) break;  // exact fit reached
        out.diagnostics.selected.push_back(best);
        in_support[best] = 1;
        support.push_back(best);
        std::sort(support.begin(), support.end());

        if (objective == OmpObjective::ls_loss) {
            theta = restricted_ls(dm, support);
        } else {
            theta = restricted_quadratic(H, c, support);
        }
        grad = -c;
        for (std::size_t j : support) {
            kernels::axpy(theta[j], H.col(static_cast<long>(j)).data(), grad.data(), p);
        }
    }

    out.model.theta = theta;
    out.diagnostics.solver_status.iterations = support.size();
    out.diagnostics.solver_status.converged = true;
    if (objective == OmpObjective::ls_loss) {
        Eigen::Map<const Eigen::VectorXd> th(theta.data(), static_cast<long>(p));
        out.model.sigma_w2 = residual_mean_square(dm, th);
    } else {
        const EmpiricalCovariance ec = empirical_covariance(dm.series(), p);
        double dotrr = 0.0;
        for (std::size_t k = 1; k <= p; ++k) dotrr += theta[k - 1] * ec.r_hat[k];
        const double deflate = static_cast<double>(ec.n) / static_cast<double>(ec.total);
        out.model.sigma_w2 = std::max((ec.r_hat[0] - dotrr) * deflate, kSigmaFloor);
    }
    apply_stability_policy(out, cfg.stability_policy);
    return out;
}

FitResult fit_yw_penalized(const EmpiricalCovariance& ec, const EstimatorConfig& cfg,
                           PenalizedNormKind kind) {
    const double gamma = resolve_gamma(cfg, ec.n, ec.p);
    const Eigen::MatrixXd R = ec.R_hat();
    const Eigen::VectorXd r = ec.rhs();
    PenalizedNormResult sol = penalized_norm_solve(R, r, gamma, kind, cfg.solver);

    FitResult out;
    out.method = (kind == PenalizedNormKind::l2) ? Method::yw_l21 : Method::yw_l11;
    out.model.theta = sol.theta;
    out.diagnostics.solver_status = sol.status;
    out.diagnostics.gamma_used = gamma;
    double dotrr = 0.0;
    for (std::size_t k = 1; k <= ec.p; ++k) dotrr += sol.theta[k - 1] * ec.r_hat[k];
    const double deflate = static_cast<double>(ec.n) / static_cast<double>(ec.total);
    out.model.sigma_w2 = std::max((ec.r_hat[0] - dotrr) * deflate, kSigmaFloor);
    apply_stability_policy(out, cfg.stability_policy);
    return out;
}

FitResult fit(const TimeSeries& series, std::size_t p, Method method, const EstimatorConfig& cfg) {
    switch (method) {
        case Method::ls:
            return fit_ls(build_design(series, p));
        case Method::yw:
            return fit_yule_walker(empirical_covariance(series, p));
        case Method::burg:
            return fit_burg(series, p);
        case Method::lasso:
            return fit_lasso(build_design(series, p), cfg);
        case Method::omp:
            return fit_omp(build_design(series, p), cfg, OmpObjective::ls_loss);
        case Method::ywomp:
            return fit_omp(build_design(series, p), cfg, OmpObjective::yw_loss);
        case Method::yw_l21:
            return fit_yw_penalized(empirical_covariance(series, p), cfg, PenalizedNormKind::l2);
        case Method::yw_l11:
            return fit_yw_penalized(empirical_covariance(series, p), cfg, PenalizedNormKind::l1);
    }
    throw InvalidConfig("unknown method");
}

}  // namespace sparsear
