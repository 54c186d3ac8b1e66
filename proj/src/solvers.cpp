#include "sparsear/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsear/errors.hpp"
#include "sparsear/kernels.hpp"

namespace sparsear {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double l1_norm(const Eigen::VectorXd& v) { return v.lpNorm<1>(); }

}  // namespace

// ---------------------------------------------------------------------------
// lasso: cyclic coordinate descent with covariance updates
// ---------------------------------------------------------------------------

LassoResult lasso_quadratic(const DesignMatrix& dm, double gamma, const SolverOptions& opts) {
    if (gamma < 0.0) throw InvalidConfig("lasso: gamma must be >= 0");
    const std::size_t p = dm.order();
    const double inv_n = 1.0 / static_cast<double>(dm.rows());
    const Eigen::MatrixXd& G = dm.gram();
    const Eigen::VectorXd b = dm.xty() * inv_n;
    const double c = dm.target_sq() * inv_n;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd az = Eigen::VectorXd::Zero(p);  // (1/n) G theta
    Eigen::VectorXd adiag(p);
    for (std::size_t j = 0; j < p; ++j) adiag[j] = G(j, j) * inv_n;

    auto objective = [&]() {
        return theta.dot(az) - 2.0 * b.dot(theta) + c + gamma * l1_norm(theta);
    };
    // Exact subgradient violation at the current iterate, O(p) per sweep.
    auto kkt_violation = [&]() {
        double worst = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double g = 2.0 * (az[j] - b[j]);
            const double v = (theta[j] != 0.0) ? std::abs(g + gamma * (theta[j] > 0.0 ? 1.0 : -1.0))
                                               : std::max(0.0, std::abs(g) - gamma);
            worst = std::max(worst, v);
        }
        return worst;
    };
    const double kkt_floor = 1e-7 * std::max(1.0, b.cwiseAbs().maxCoeff());

    LassoResult out;
    double f_prev = objective();
    out.objective_trace.push_back(f_prev);

    std::size_t sweep = 0;
    bool converged = false;
    for (; sweep < opts.max_iter; ++sweep) {
        for (std::size_t j = 0; j < p; ++j) {
            if (adiag[j] <= 0.0) continue;
            const double rho = b[j] - az[j] + adiag[j] * theta[j];
            const double tj = soft_threshold(rho, 0.5 * gamma) / adiag[j];
            const double delta = tj - theta[j];
            if (delta != 0.0) {
                theta[j] = tj;
                kernels::axpy(delta * inv_n, G.col(j).data(), az.data(), p);
            }
        }
        const double f = objective();
        out.objective_trace.push_back(f);
        if (f_prev - f <= opts.tol * std::max(1.0, std::abs(f_prev)) &&
            kkt_violation() <= kkt_floor) {
            f_prev = std::min(f, f_prev);
            converged = true;
            ++sweep;
            break;
        }
        f_prev = f;
    }

    out.theta.assign(theta.data(), theta.data() + p);
    out.status.converged = converged;
    out.status.iterations = sweep;
    out.status.objective = f_prev;
    return out;
}

KktReport kkt_check(const DesignMatrix& dm, const std::vector<double>& theta_hat, double gamma,
                    double tol) {
    const std::size_t p = dm.order();
    if (theta_hat.size() != p) throw InvalidConfig("kkt_check: theta dimension mismatch");
    const double inv_n = 1.0 / static_cast<double>(dm.rows());
    Eigen::Map<const Eigen::VectorXd> th(theta_hat.data(), p);
    // g = (2/n) X^T (X theta - y)
    Eigen::VectorXd g = 2.0 * inv_n * (dm.gram() * th - dm.xty());

    KktReport rep;
    rep.tolerance = tol;
    double worst = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double viol;
        if (theta_hat[j] != 0.0) {
            viol = std::abs(g[j] + gamma * (theta_hat[j] > 0.0 ? 1.0 : -1.0));
            rep.active_set.push_back(j);
        } else {
            viol = std::max(0.0, std::abs(g[j]) - gamma);
        }
        worst = std::max(worst, viol);
    }
    rep.max_violation = worst;
    rep.stationarity_ok = worst <= tol;
    return rep;
}

std::vector<double> restricted_ls(const DesignMatrix& dm,
                                  const std::vector<std::size_t>& support) {
    const std::size_t p = dm.order();
    std::vector<double> theta(p, 0.0);
    if (support.empty()) return theta;
    if (support.size() > dm.rows()) {
        throw InvalidConfig("restricted_ls: support larger than row count");
    }
    for (std::size_t j : support) {
        if (j >= p) throw InvalidConfig("restricted_ls: support index out of range");
    }

    const std::size_t s = support.size();
    Eigen::MatrixXd gs(s, s);
    Eigen::VectorXd qs(s);
    for (std::size_t a = 0; a < s; ++a) {
        qs[a] = dm.xty()[static_cast<long>(support[a])];
        for (std::size_t bcol = 0; bcol < s; ++bcol) {
            gs(a, bcol) = dm.gram()(support[a], support[bcol]);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gs);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmin > 0.0) || lmax / lmin > 1e12) {
        throw RankDeficient("restricted_ls: support Gram condition number above 1e12");
    }
    Eigen::VectorXd sol =
        eig.eigenvectors() *
        (eig.eigenvalues().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * qs));
    for (std::size_t a = 0; a < s; ++a) theta[support[a]] = sol[a];
    return theta;
}

// ---------------------------------------------------------------------------
// penalized norm objectives on (R, r)
// ---------------------------------------------------------------------------

namespace {

// ADMM for min ||z||_2 + gamma*||theta||_1  s.t.  z = R theta - r.
// theta-update is an exact-coordinate-descent lasso on the augmented term,
// z-update is the projection prox of the Euclidean norm.
PenalizedNormResult admm_l2(const Eigen::MatrixXd& R, const Eigen::VectorXd& r, double gamma,
                            const SolverOptions& opts) {
    const std::size_t p = static_cast<std::size_t>(R.cols());
    const Eigen::MatrixXd M = R.transpose() * R;
    const Eigen::VectorXd Rtr = R.transpose() * r;
    Eigen::VectorXd mdiag = M.diagonal();

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd mz = Eigen::VectorXd::Zero(p);  // M theta
    Eigen::VectorXd z = Eigen::VectorXd::Zero(R.rows());
    Eigen::VectorXd u = Eigen::VectorXd::Zero(R.rows());
    double rho = 1.0;

    auto objective = [&](const Eigen::VectorXd& th) {
        return (R * th - r).norm() + gamma * l1_norm(th);
    };

    PenalizedNormResult out;
    Eigen::VectorXd best_theta = theta;
    double best_obj = objective(theta);

    bool converged = false;
    std::size_t it = 0;
    const std::size_t max_iter = opts.max_iter;
    for (; it < max_iter; ++it) {
        // theta-step: min gamma*||th||_1 + (rho/2)||R th - v||^2
        const Eigen::VectorXd v = r + z - u;
        const Eigen::VectorXd rv = R.transpose() * v;
        for (int inner = 0; inner < 25; ++inner) {
            double max_delta = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                if (mdiag[j] <= 0.0) continue;
                const double rho_j = rv[j] - mz[j] + mdiag[j] * theta[j];
                const double tj = soft_threshold(rho_j, gamma / rho) / mdiag[j];
                const double delta = tj - theta[j];
                if (delta != 0.0) {
                    theta[j] = tj;
                    kernels::axpy(delta, M.col(j).data(), mz.data(), p);
                    max_delta = std::max(max_delta, std::abs(delta));
                }
            }
            if (max_delta <= 1e-12 * (1.0 + theta.lpNorm<Eigen::Infinity>())) break;
        }

        // z-step: prox of ||.||/rho at w
        const Eigen::VectorXd rtheta = R * theta;
        const Eigen::VectorXd w = rtheta - r + u;
        const Eigen::VectorXd z_old = z;
        const double wn = w.norm();
        if (wn * rho <= 1.0) {
            z.setZero();
        } else {
            z = (1.0 - 1.0 / (rho * wn)) * w;
        }
        u += rtheta - r - z;

        const double obj = objective(theta);
        if (obj < best_obj) {
            best_obj = obj;
            best_theta = theta;
        }

        const double pri = (rtheta - r - z).norm();
        const double dual = rho * (R.transpose() * (z - z_old)).norm();
        const double eps_pri = opts.tol * (std::sqrt(static_cast<double>(p)) +
                                           std::max({rtheta.norm(), z.norm(), r.norm()}));
        const double eps_dual =
            opts.tol * (std::sqrt(static_cast<double>(p)) + rho * (R.transpose() * u).norm());
        if (pri <= eps_pri && dual <= eps_dual) {
            converged = true;
            ++it;
            break;
        }

        // residual balancing keeps rho in a useful range
        if (pri > 10.0 * dual) {
            rho *= 2.0;
            u *= 0.5;
        } else if (dual > 10.0 * pri) {
            rho *= 0.5;
            u *= 2.0;
        }
    }

    out.theta.assign(best_theta.data(), best_theta.data() + p);
    out.status.converged = converged;
    out.status.iterations = it;
    out.status.objective = best_obj;
    return out;
}

// Primal-dual interior point for
//   min 1't + gamma*1'u  s.t.  R theta - r <= t, -(R theta - r) <= t,
//                              theta <= u, -theta <= u.
// The Newton normal matrix reduces by block elimination to the p x p SPD
// system (R' H1 R + H3) dtheta = g with harmonic-mean diagonal weights, so a
// full Mehrotra step costs one dense p x p Cholesky.
PenalizedNormResult ipm_l1(const Eigen::MatrixXd& R, const Eigen::VectorXd& r, double gamma,
                           const SolverOptions& opts) {
    using Vec = Eigen::VectorXd;
    const long p = R.cols();
    const long rows = R.rows();

    Vec th = Vec::Zero(p);
    Vec t = r.cwiseAbs() * 1.5 + Vec::Ones(rows);
    Vec uu = Vec::Ones(p);

    Vec s1 = r + t;   // b1 - (R th - t), th = 0
    Vec s2 = -r + t;
    Vec s3 = uu;
    Vec s4 = uu;
    Vec z1 = Vec::Constant(rows, 0.5);
    Vec z2 = Vec::Constant(rows, 0.5);
    Vec z3 = Vec::Constant(p, 0.5 * gamma);
    Vec z4 = Vec::Constant(p, 0.5 * gamma);

    const double bnorm = 1.0 + r.lpNorm<Eigen::Infinity>();
    const double cnorm = 1.0 + std::max(1.0, gamma);
    const std::size_t max_iter = std::min<std::size_t>(opts.max_iter, 200);

    PenalizedNormResult out;
    bool converged = false;
    std::size_t it = 0;
    double gap = std::numeric_limits<double>::infinity();

    for (; it < max_iter; ++it) {
        const Vec rth = R * th;
        // primal residuals: b - A x - s
        const Vec rp1 = r - (rth - t) - s1;
        const Vec rp2 = -r - (-rth - t) - s2;
        const Vec rp3 = -(th - uu) - s3;
        const Vec rp4 = -(-th - uu) - s4;
        // dual residual: -(c + A' z)
        const Vec rd_th = -(R.transpose() * (z1 - z2) + z3 - z4);
        const Vec rd_t = -(Vec::Ones(rows) - z1 - z2);
        const Vec rd_u = -(Vec::Constant(p, gamma) - z3 - z4);

        const double mu =
            (s1.dot(z1) + s2.dot(z2) + s3.dot(z3) + s4.dot(z4)) / static_cast<double>(2 * (rows + p));
        const double primal_obj = t.sum() + gamma * uu.sum();
        const double dual_obj = -(r.dot(z1) - r.dot(z2));
        gap = primal_obj - dual_obj;

        const double rp_inf = std::max({rp1.lpNorm<Eigen::Infinity>(), rp2.lpNorm<Eigen::Infinity>(),
                                        rp3.lpNorm<Eigen::Infinity>(), rp4.lpNorm<Eigen::Infinity>()});
        const double rd_inf = std::max({rd_th.lpNorm<Eigen::Infinity>(), rd_t.lpNorm<Eigen::Infinity>(),
                                        rd_u.lpNorm<Eigen::Infinity>()});
        if (mu < 1e-13 * cnorm && rp_inf < 1e-11 * bnorm && rd_inf < 1e-11 * cnorm) {
            converged = true;
            break;
        }

        const Vec d1 = z1.cwiseQuotient(s1);
        const Vec d2 = z2.cwiseQuotient(s2);
        const Vec d3 = z3.cwiseQuotient(s3);
        const Vec d4 = z4.cwiseQuotient(s4);
        const Vec e1 = d1 + d2;
        const Vec e1m = d2 - d1;
        const Vec e3 = d3 + d4;
        const Vec e3m = d4 - d3;
        const Vec h1 = 4.0 * d1.cwiseProduct(d2).cwiseQuotient(e1);
        const Vec h3 = 4.0 * d3.cwiseProduct(d4).cwiseQuotient(e3);

        Eigen::MatrixXd K = R.transpose() * h1.asDiagonal() * R;
        K.diagonal() += h3;
        K.diagonal().array() += 1e-14 * (1.0 + K.trace() / static_cast<double>(p));
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() != Eigen::Success) {
            K.diagonal().array() += 1e-8 * (1.0 + K.trace() / static_cast<double>(p));
            llt.compute(K);
            if (llt.info() != Eigen::Success) break;
        }

        // One Newton solve for a given complementarity target rc_i.
        auto newton = [&](const Vec& rc1, const Vec& rc2, const Vec& rc3, const Vec& rc4, Vec& dth,
                          Vec& dt, Vec& du, Vec& ds1, Vec& ds2, Vec& ds3, Vec& ds4, Vec& dz1,
                          Vec& dz2, Vec& dz3, Vec& dz4) {
            // g = rd - A' S^{-1} (rc - Z rp)
            const Vec w1 = (rc1 - z1.cwiseProduct(rp1)).cwiseQuotient(s1);
            const Vec w2 = (rc2 - z2.cwiseProduct(rp2)).cwiseQuotient(s2);
            const Vec w3 = (rc3 - z3.cwiseProduct(rp3)).cwiseQuotient(s3);
            const Vec w4 = (rc4 - z4.cwiseProduct(rp4)).cwiseQuotient(s4);
            const Vec g_th = rd_th - (R.transpose() * (w1 - w2) + (w3 - w4));
            const Vec g_t = rd_t - (-w1 - w2);
            const Vec g_u = rd_u - (-w3 - w4);

            const Vec gt_scaled = g_t.cwiseQuotient(e1);
            const Vec gu_scaled = g_u.cwiseQuotient(e3);
            const Vec rhs = g_th - R.transpose() * (e1m.cwiseProduct(gt_scaled)) -
                            e3m.cwiseProduct(gu_scaled);
            dth = llt.solve(rhs);
            const Vec rdth = R * dth;
            dt = (g_t - e1m.cwiseProduct(rdth)).cwiseQuotient(e1);
            du = (g_u - e3m.cwiseProduct(dth)).cwiseQuotient(e3);

            ds1 = rp1 - (rdth - dt);
            ds2 = rp2 - (-rdth - dt);
            ds3 = rp3 - (dth - du);
            ds4 = rp4 - (-dth - du);
            dz1 = (rc1 - z1.cwiseProduct(ds1)).cwiseQuotient(s1);
            dz2 = (rc2 - z2.cwiseProduct(ds2)).cwiseQuotient(s2);
            dz3 = (rc3 - z3.cwiseProduct(ds3)).cwiseQuotient(s3);
            dz4 = (rc4 - z4.cwiseProduct(ds4)).cwiseQuotient(s4);
        };

        auto step_len = [](const Vec& v, const Vec& dv) {
            double a = 1.0;
            for (long i = 0; i < v.size(); ++i) {
                if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
            }
            return a;
        };

        Vec dth, dt, du, ds1, ds2, ds3, ds4, dz1, dz2, dz3, dz4;
        // affine (predictor) direction
        newton(-s1.cwiseProduct(z1), -s2.cwiseProduct(z2), -s3.cwiseProduct(z3),
               -s4.cwiseProduct(z4), dth, dt, du, ds1, ds2, ds3, ds4, dz1, dz2, dz3, dz4);
        double ap = std::min({step_len(s1, ds1), step_len(s2, ds2), step_len(s3, ds3),
                              step_len(s4, ds4), 1.0});
        double ad = std::min({step_len(z1, dz1), step_len(z2, dz2), step_len(z3, dz3),
                              step_len(z4, dz4), 1.0});
        const double mu_aff = ((s1 + ap * ds1).dot(z1 + ad * dz1) + (s2 + ap * ds2).dot(z2 + ad * dz2) +
                               (s3 + ap * ds3).dot(z3 + ad * dz3) + (s4 + ap * ds4).dot(z4 + ad * dz4)) /
                              static_cast<double>(2 * (rows + p));
        const double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);

        // corrector
        const Vec rc1 = Vec::Constant(rows, sigma * mu) - s1.cwiseProduct(z1) - ds1.cwiseProduct(dz1);
        const Vec rc2 = Vec::Constant(rows, sigma * mu) - s2.cwiseProduct(z2) - ds2.cwiseProduct(dz2);
        const Vec rc3 = Vec::Constant(p, sigma * mu) - s3.cwiseProduct(z3) - ds3.cwiseProduct(dz3);
        const Vec rc4 = Vec::Constant(p, sigma * mu) - s4.cwiseProduct(z4) - ds4.cwiseProduct(dz4);
        newton(rc1, rc2, rc3, rc4, dth, dt, du, ds1, ds2, ds3, ds4, dz1, dz2, dz3, dz4);

        ap = 0.995 * std::min({step_len(s1, ds1), step_len(s2, ds2), step_len(s3, ds3),
                               step_len(s4, ds4)});
        ad = 0.995 * std::min({step_len(z1, dz1), step_len(z2, dz2), step_len(z3, dz3),
                               step_len(z4, dz4)});
        ap = std::min(ap, 1.0);
        ad = std::min(ad, 1.0);

        th += ap * dth;
        t += ap * dt;
        uu += ap * du;
        s1 += ap * ds1;
        s2 += ap * ds2;
        s3 += ap * ds3;
        s4 += ap * ds4;
        z1 += ad * dz1;
        z2 += ad * dz2;
        z3 += ad * dz3;
        z4 += ad * dz4;
    }

    out.theta.assign(th.data(), th.data() + p);
    out.status.converged = converged;
    out.status.iterations = it;
    out.status.objective = (R * th - r).lpNorm<1>() + gamma * th.lpNorm<1>();
    out.duality_gap = gap;
    return out;
}

}  // namespace

PenalizedNormResult penalized_norm_solve(const Eigen::MatrixXd& R, const Eigen::VectorXd& r,
                                         double gamma, PenalizedNormKind kind,
                                         const SolverOptions& opts) {
    if (gamma <= 0.0) throw InvalidConfig("penalized_norm_solve: gamma must be positive");
    if (R.rows() != r.size()) throw InvalidConfig("penalized_norm_solve: dimension mismatch");
    if (kind == PenalizedNormKind::l2) return admm_l2(R, r, gamma, opts);
    return ipm_l1(R, r, gamma, opts);
}

}  // namespace sparsear
