#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "sparsear/errors.hpp"
#include "sparsear/estimators.hpp"
#include "sparsear/rng.hpp"

using namespace sparsear;

namespace {

ArModel sparse_model(Rng& rng, std::size_t p, std::size_t s, double eta) {
    ArModel m;
    m.theta.assign(p, 0.0);
    std::vector<std::size_t> idx(p);
    for (std::size_t i = 0; i < p; ++i) idx[i] = i;
    for (std::size_t i = 0; i < s; ++i) {
        std::swap(idx[i], idx[i + rng.below(p - i)]);
    }
    for (std::size_t i = 0; i < s; ++i) {
        m.theta[idx[i]] = ((1.0 - eta) / static_cast<double>(s)) * rng.rademacher();
    }
    m.sigma_w2 = 1.0;
    return m;
}

double l2_err(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("fit_ls: consistency and white noise") {
    const auto ts = simulate(ArModel{{0.5}, 1.0}, {}, 10000, 20, 5150);
    const auto fr = fit_ls(build_design(ts, 1));
    CHECK(std::abs(fr.model.theta[0] - 0.5) < 0.05);
    CHECK(fr.stable);
    CHECK(std::abs(fr.model.sigma_w2 - 1.0) < 0.1);

    const auto white = simulate(ArModel{{0.0}, 1.0}, {}, 10000, 0, 5151);
    const auto frw = fit_ls(build_design(white, 5));
    for (double t : frw.model.theta) CHECK(std::abs(t) < 0.05);
}

TEST_CASE("fit_ls: underdetermined case returns min-norm and is flagged") {
    const auto ts = simulate(ArModel{{0.3}, 1.0}, {}, 24, 10, 99);  // n = 24 - 20 = 4 < p = 20
    const auto dm = build_design(ts, 20);
    REQUIRE(dm.rows() < dm.order());
    const auto fr = fit_ls(dm);
    CHECK(fr.diagnostics.underdetermined);
    // interpolating solution: residual is ~0
    Eigen::Map<const Eigen::VectorXd> th(fr.model.theta.data(), 20);
    const Eigen::VectorXd resid = dm.target_vector() - dm.dense() * th;
    CHECK(resid.norm() < 1e-8 * (1.0 + dm.target_vector().norm()));
}

TEST_CASE("fit_yule_walker: consistency, equivalence with a direct solve, stability") {
    const auto ts = simulate(ArModel{{0.5}, 1.0}, {}, 100000, 50, 616);
    const auto fr = fit_yule_walker(empirical_covariance(ts, 1));
    CHECK(std::abs(fr.model.theta[0] - 0.5) < 0.02);

    Rng rng(2718);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t p = 1 + rng.below(8);
        const auto m = sparse_model(rng, std::max<std::size_t>(p, 2), std::max<std::size_t>(1, p / 2), 0.4);
        const auto sim = simulate(m, {}, 150 + rng.below(300), 50, mix_seed(3, rep));
        const auto ec = empirical_covariance(sim, p);
        const auto yw = fit_yule_walker(ec);

        // Levinson output equals the dense linear solve of R theta = r
        const Eigen::VectorXd direct = ec.R_hat().ldlt().solve(ec.rhs());
        for (std::size_t i = 0; i < p; ++i) {
            CHECK(std::abs(yw.model.theta[i] - direct[static_cast<long>(i)]) < 1e-8);
        }
        CHECK(yw.stable);
        CHECK(yw.stable == is_stable(yw.model.theta));
    }
}

TEST_CASE("fit_burg: consistency and guaranteed stability") {
    const auto ts = simulate(ArModel{{0.5}, 1.0}, {}, 100000, 50, 717);
    const auto fr = fit_burg(ts, 1);
    CHECK(std::abs(fr.model.theta[0] - 0.5) < 0.02);
    CHECK(fr.stable);

    Rng rng(31415);
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = sparse_model(rng, 6, 3, 0.3);
        const auto sim = simulate(m, {}, 120, 60, mix_seed(7, rep));
        const auto fb = fit_burg(sim, 6);
        CHECK(fb.stable);
    }
    CHECK_THROWS_AS(fit_burg(TimeSeries{{1.0, 2.0}, 1}, 2), TooShort);
}

TEST_CASE("fit_burg and fit_yule_walker agree on white noise") {
    const auto white = simulate(ArModel{{0.0}, 1.0}, {}, 100000, 0, 818);
    const auto burg = fit_burg(white, 5);
    const auto yw = fit_yule_walker(empirical_covariance(white, 5));
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(burg.model.theta[i] - yw.model.theta[i]) < 0.02);
    }
}

TEST_CASE("fit_lasso: huge gamma, kkt certificate, auto gamma resolution") {
    const auto ts = simulate(ArModel{{0.4, 0.0, 0.2}, 1.0}, {}, 400, 30, 919);
    const auto dm = build_design(ts, 10);

    EstimatorConfig cfg;
    cfg.gamma = 1e6;
    auto fr = fit_lasso(dm, cfg);
    for (double t : fr.model.theta) CHECK(t == 0.0);
    CHECK(fr.stable);

    cfg.gamma = 0.05;
    fr = fit_lasso(dm, cfg);
    REQUIRE(fr.diagnostics.kkt.has_value());
    CHECK(fr.diagnostics.kkt->max_violation <= 1e-6);
    CHECK(fr.stable == is_stable(fr.model.theta));

    cfg.gamma.reset();
    cfg.d2_constant = 0.15;
    fr = fit_lasso(dm, cfg);
    CHECK(fr.diagnostics.gamma_used ==
          doctest::Approx(0.15 * std::sqrt(std::log(10.0) / 390.0)));
}

TEST_CASE("fit_lasso with gamma 0 equals fit_ls on a full-rank tall design") {
    const auto ts = simulate(ArModel{{0.5, -0.2}, 1.0}, {}, 120, 30, 1020);
    const auto dm = build_design(ts, 4);
    EstimatorConfig cfg;
    cfg.gamma = 0.0;
    cfg.solver.tol = 1e-14;
    const auto lasso = fit_lasso(dm, cfg);
    const auto ls = fit_ls(dm);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(lasso.model.theta[i] - ls.model.theta[i]) <= 1e-6);
    }
}

TEST_CASE("fit_lasso beats yule-walker at desk scale in the compressive regime") {
    // p = 64, n = 320 rows, s = 3: the regularized fit should win on most seeds.
    std::size_t wins = 0;
    const std::size_t seeds = 30;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        Rng rng(mix_seed(42, seed));
        const auto m = sparse_model(rng, 64, 3, 0.5);
        const auto sim = simulate(m, {}, 320 + 64, 640, mix_seed(43, seed));
        EstimatorConfig cfg;
        cfg.gamma = 0.1;
        const auto lasso = fit_lasso(build_design(sim, 64), cfg);
        const auto yw = fit_yule_walker(empirical_covariance(sim, 64));
        if (l2_err(lasso.model.theta, m.theta) < l2_err(yw.model.theta, m.theta)) ++wins;
    }
    CHECK(wins >= seeds * 8 / 10);
}

TEST_CASE("fit_omp: zero budget, selection order on an orthogonal design") {
    const double h = std::sqrt(4.0);
    TimeSeries impulse{{0.0, 0.0, 0.0, h, 0.0, 0.0, 0.0}, 1};
    const auto dm = build_design(impulse, 3);
    EstimatorConfig cfg;
    cfg.s_star = 0;
    auto fr = fit_omp(dm, cfg, OmpObjective::ls_loss);
    for (double t : fr.model.theta) CHECK(t == 0.0);

    // orthogonal columns: greedy order is descending |X_j 'y|
    cfg.s_star = 3;
    fr = fit_omp(dm, cfg, OmpObjective::ls_loss);
    const Eigen::MatrixXd X = dm.dense();
    const Eigen::VectorXd y = dm.target_vector();
    std::vector<std::size_t> expect{0, 1, 2};
    std::sort(expect.begin(), expect.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(X.col(static_cast<long>(a)).dot(y)) >
               std::abs(X.col(static_cast<long>(b)).dot(y));
    });
    // selection stops early only on an exact fit; here all three get picked
    REQUIRE(fr.diagnostics.selected.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(fr.diagnostics.selected[i] == expect[i]);
}

TEST_CASE("fit_omp: support grows one index at a time and never shrinks") {
    const auto ts = simulate(ArModel{{0.4, 0.0, 0.0, 0.2}, 1.0}, {}, 600, 50, 2100);
    const auto dm = build_design(ts, 12);
    EstimatorConfig prev_cfg;
    std::vector<std::size_t> prev;
    for (std::size_t k = 1; k <= 6; ++k) {
        EstimatorConfig cfg;
        cfg.s_star = k;
        const auto fr = fit_omp(dm, cfg, OmpObjective::ls_loss);
        REQUIRE(fr.diagnostics.selected.size() == k);
        // deterministic greedy: prefix stability across budgets
        for (std::size_t i = 0; i + 1 < k; ++i) CHECK(fr.diagnostics.selected[i] == prev[i]);
        prev = fr.diagnostics.selected;
    }
}

TEST_CASE("fit_omp: support recovery at desk scale") {
    // well-separated magnitudes, p = 50, rows = 400
    std::size_t hits = 0;
    const std::size_t seeds = 25;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        Rng rng(mix_seed(55, seed));
        ArModel m;
        m.theta.assign(50, 0.0);
        const std::size_t s1 = rng.below(50);
        std::size_t s2 = rng.below(50);
        while (s2 == s1) s2 = rng.below(50);
        std::size_t s3 = rng.below(50);
        while (s3 == s1 || s3 == s2) s3 = rng.below(50);
        m.theta[s1] = 0.3;
        m.theta[s2] = -0.25;
        m.theta[s3] = 0.2;
        m.sigma_w2 = 1.0;
        const auto sim = simulate(m, {}, 450, 500, mix_seed(56, seed));
        EstimatorConfig cfg;
        cfg.s_star = 12;
        const auto fr = fit_omp(build_design(sim, 50), cfg, OmpObjective::ls_loss);
        const auto& sel = fr.diagnostics.selected;
        const bool got = std::count(sel.begin(), sel.end(), s1) && std::count(sel.begin(), sel.end(), s2) &&
                         std::count(sel.begin(), sel.end(), s3);
        if (got) ++hits;
    }
    CHECK(hits >= seeds - 2);
}

TEST_CASE("fit_omp: auto budget uses the schedule and the pilot spread") {
    const auto ts = simulate(ArModel{{0.3, 0.1}, 1.0}, {}, 800, 50, 2222);
    const auto dm = build_design(ts, 8);
    EstimatorConfig cfg;
    cfg.sparsity = 1;
    cfg.rho_hint = 1.0;
    auto fr = fit_omp(dm, cfg, OmpObjective::ls_loss);
    CHECK(fr.diagnostics.s_star_used == 8);  // ceil(4 ln 20) = 12 capped at p = 8

    cfg.rho_hint.reset();  // pilot yw fit supplies rho
    fr = fit_omp(dm, cfg, OmpObjective::ls_loss);
    CHECK(fr.diagnostics.s_star_used >= 1);
    CHECK(fr.diagnostics.s_star_used <= 8);

    EstimatorConfig bad;
    bad.s_star = dm.rows() + 1;
    CHECK_THROWS_AS(fit_omp(dm, bad, OmpObjective::ls_loss), InvalidConfig);
}

TEST_CASE("fit_yw_penalized: huge gamma gives zero; tiny gamma approaches yw") {
    const auto ts = simulate(ArModel{{0.5, -0.2}, 1.0}, {}, 20000, 50, 2323);
    const auto ec = empirical_covariance(ts, 6);

    EstimatorConfig cfg;
    cfg.gamma = 1e6;
    for (auto kind : {PenalizedNormKind::l2, PenalizedNormKind::l1}) {
        const auto fr = fit_yw_penalized(ec, cfg, kind);
        for (double t : fr.model.theta) CHECK(std::abs(t) <= 1e-9);
    }

    cfg.gamma = 1e-7;
    cfg.solver.tol = 1e-11;
    cfg.solver.max_iter = 80000;
    const auto fr = fit_yw_penalized(ec, cfg, PenalizedNormKind::l2);
    const auto yw = fit_yule_walker(ec);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(fr.model.theta[i] - yw.model.theta[i]) <= 1e-3);
    }
}

TEST_CASE("fit_yw_penalized beats plain yw at desk scale") {
    // p = 60, rows = 300, s = 3; both penalized variants win on most seeds.
    std::size_t wins_l21 = 0, wins_l11 = 0;
    const std::size_t seeds = 20;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        Rng rng(mix_seed(77, seed));
        const auto m = sparse_model(rng, 60, 3, 0.5);
        const auto sim = simulate(m, {}, 360, 600, mix_seed(78, seed));
        const auto ec = empirical_covariance(sim, 60);
        EstimatorConfig cfg;
        cfg.gamma = 0.02;
        const auto yw = fit_yule_walker(ec);
        const double err_yw = l2_err(yw.model.theta, m.theta);
        if (l2_err(fit_yw_penalized(ec, cfg, PenalizedNormKind::l2).model.theta, m.theta) < err_yw) {
            ++wins_l21;
        }
        if (l2_err(fit_yw_penalized(ec, cfg, PenalizedNormKind::l1).model.theta, m.theta) < err_yw) {
            ++wins_l11;
        }
    }
    CHECK(wins_l21 >= seeds * 7 / 10);
    CHECK(wins_l11 >= seeds * 7 / 10);
}

TEST_CASE("stability policies") {
    // an unstable lasso output is hard to arrange; drive the policy through
    // fit_ls-style unstable estimates using a near-unit-root model
    const auto ts = simulate(ArModel{{0.995}, 1.0}, {}, 60, 100, 123);
    const auto dm = build_design(ts, 2);
    EstimatorConfig cfg;
    cfg.gamma = 0.0;
    auto fr = fit_lasso(dm, cfg);  // warn: never alters theta
    CHECK(fr.stable == is_stable(fr.model.theta));

    cfg.stability_policy = StabilityPolicy::project_l1;
    fr = fit_lasso(dm, cfg);
    if (fr.diagnostics.projected) {
        double l1 = 0.0;
        for (double t : fr.model.theta) l1 += std::abs(t);
        CHECK(l1 <= 1.0 - 1e-3 + 1e-12);
        CHECK(fr.stable);
    }
}

TEST_CASE("auto_gamma arithmetic") {
    CHECK(auto_gamma(1500, 300, 0.15) == doctest::Approx(0.0092498).epsilon(1e-3));
    const double g1 = auto_gamma(1000, 50, 0.15);
    const double g4 = auto_gamma(4000, 50, 0.15);
    CHECK(g1 == doctest::Approx(2.0 * g4));
    CHECK(auto_gamma(1000, 100, 0.15) > auto_gamma(1000, 50, 0.10));
    CHECK_THROWS_AS(auto_gamma(1000, 1, 0.15), InvalidConfig);
}

TEST_CASE("auto_s_star arithmetic and monotonicity") {
    CHECK(auto_s_star(3, 1.0) == 50);   // ceil(12 ln 60)
    CHECK(auto_s_star(1, 1.0) == 12);   // ceil(4 ln 20)
    CHECK(auto_s_star(4, 1.0) >= auto_s_star(3, 1.0));
    CHECK(auto_s_star(3, 2.0) >= auto_s_star(3, 1.0));
    CHECK_THROWS_AS(auto_s_star(0, 1.0), InvalidConfig);
    CHECK_THROWS_AS(auto_s_star(3, 0.5), InvalidConfig);
}

TEST_CASE("method name round trip") {
    for (Method m : {Method::ls, Method::yw, Method::burg, Method::lasso, Method::yw_l21,
                     Method::yw_l11, Method::omp, Method::ywomp}) {
        REQUIRE(method_from_name(method_name(m)).has_value());
        CHECK(*method_from_name(method_name(m)) == m);
    }
    CHECK_FALSE(method_from_name("nope").has_value());
}
