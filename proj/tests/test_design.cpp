#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "sparsear/design.hpp"
#include "sparsear/errors.hpp"
#include "sparsear/rng.hpp"

using namespace sparsear;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

ArModel random_sufficient_stable(Rng& rng, std::size_t p, double l1_target) {
    ArModel m;
    m.theta.assign(p, 0.0);
    double l1 = 0.0;
    for (auto& t : m.theta) {
        t = rng.uniform(-1.0, 1.0);
        l1 += std::abs(t);
    }
    for (auto& t : m.theta) t *= l1_target / l1;
    m.sigma_w2 = 1.0;
    return m;
}

}  // namespace

TEST_CASE("build_design: hand-constructed layout") {
    TimeSeries ts{{1.0, 2.0, 3.0, 4.0}, 1};
    const auto dm = build_design(ts, 2);
    REQUIRE(dm.rows() == 2);
    CHECK(dm.x(0, 0) == 3.0);
    CHECK(dm.x(0, 1) == 2.0);
    CHECK(dm.x(1, 0) == 2.0);
    CHECK(dm.x(1, 1) == 1.0);
    CHECK(dm.target(0) == 4.0);
    CHECK(dm.target(1) == 3.0);

    // Gram/correlation shortcuts agree with the dense view.
    const Eigen::MatrixXd X = dm.dense();
    const Eigen::VectorXd y = dm.target_vector();
    CHECK((dm.gram() - X.transpose() * X).norm() < 1e-12);
    CHECK((dm.xty() - X.transpose() * y).norm() < 1e-12);
    CHECK(dm.target_sq() == doctest::Approx(y.squaredNorm()));
}

TEST_CASE("build_design: boundary and error cases") {
    TimeSeries three{{1.0, 2.0, 3.0}, 1};
    const auto dm = build_design(three, 2);
    CHECK(dm.rows() == 1);
    CHECK_THROWS_AS(build_design(TimeSeries{{1.0, 2.0}, 1}, 2), TooShort);
}

TEST_CASE("design: Toeplitz structure and Gram recurrence on random data") {
    Rng rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t p = 2 + rng.below(6);
        const std::size_t m = p + 5 + rng.below(40);
        TimeSeries ts;
        for (std::size_t i = 0; i < m; ++i) ts.values.push_back(rng.uniform(-1.0, 1.0));
        const auto dm = build_design(ts, p);
        for (std::size_t i = 0; i + 1 < dm.rows(); ++i) {
            for (std::size_t j = 1; j < p; ++j) {
                CHECK(dm.x(i, j) == dm.x(i + 1, j - 1));
            }
        }
        const Eigen::MatrixXd X = dm.dense();
        CHECK((dm.gram() - X.transpose() * X).norm() < 1e-10 * (1.0 + dm.gram().norm()));
        CHECK((dm.xty() - X.transpose() * dm.target_vector()).norm() < 1e-10);
    }
}

TEST_CASE("design: LS on the built matrix recovers AR(1)") {
    const ArModel m{{0.5}, 1.0};
    const auto ts = simulate(m, {}, 10000, 10, 321);
    const auto dm = build_design(ts, 1);
    const double theta_hat = dm.xty()[0] / dm.gram()(0, 0);
    CHECK(std::abs(theta_hat - 0.5) < 0.05);
}

TEST_CASE("empirical covariance: whiteness and AR(1) decay") {
    const auto white = simulate(ArModel{{0.0}, 1.0}, {}, 100000, 0, 555);
    const auto ec = empirical_covariance(white, 10);
    CHECK(std::abs(ec.r_hat[0] - 1.0) < 0.02);
    for (std::size_t k = 1; k <= 10; ++k) CHECK(std::abs(ec.r_hat[k]) < 0.02);

    const auto ar1 = simulate(ArModel{{0.5}, 1.0}, {}, 100000, 50, 556);
    const auto ec1 = empirical_covariance(ar1, 6);
    for (std::size_t k = 0; k <= 5; ++k) {
        const double expect = (4.0 / 3.0) * std::pow(0.5, k);
        CHECK(std::abs(ec1.r_hat[k] - expect) < 0.05 * expect);
    }
}

TEST_CASE("empirical covariance: R_hat is PSD Toeplitz") {
    Rng rng(77);
    for (int rep = 0; rep < 6; ++rep) {
        const auto m = random_sufficient_stable(rng, 3, 0.6);
        const auto ts = simulate(m, {}, 300, 30, 1000 + rep);
        const auto ec = empirical_covariance(ts, 8);
        const Eigen::MatrixXd R = ec.R_hat();
        for (std::size_t i = 0; i < 8; ++i) {
            for (std::size_t j = 0; j < 8; ++j) {
                CHECK(R(i, j) == ec.r_hat[i >= j ? i - j : j - i]);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
        CHECK(eig.eigenvalues().minCoeff() > -1e-10 * std::abs(ec.r_hat[0]));
    }
}

TEST_CASE("empirical covariance: max deviation shrinks like n^{-1/2}") {
    // Median over 50 seeds of the max entrywise deviation from the theoretical
    // covariance; doubling n should shrink it by a factor in [1.2, 1.7].
    const std::size_t p = 10;
    const ArModel m{{0.3, 0.0, 0.0, 0.15}, 1.0};
    const auto r_true = theoretical_autocovariance(m, p);
    auto median_dev = [&](std::size_t n, std::uint64_t salt) {
        std::vector<double> devs;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto ts = simulate(m, {}, n, 40, mix_seed(salt, seed));
            const auto ec = empirical_covariance(ts, p);
            double worst = 0.0;
            for (std::size_t k = 0; k <= p; ++k) {
                worst = std::max(worst, std::abs(ec.r_hat[k] - r_true[k]));
            }
            devs.push_back(worst);
        }
        std::sort(devs.begin(), devs.end());
        return 0.5 * (devs[24] + devs[25]);
    };
    const double at_n = median_dev(4000, 11);
    const double at_2n = median_dev(8000, 12);
    const double ratio = at_n / at_2n;
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.7);
}

TEST_CASE("empirical covariance vs (1/n)X'X: edge terms are O(p/n)") {
    const auto ts = simulate(ArModel{{0.4, 0.2}, 1.0}, {}, 2000, 20, 4242);
    const std::size_t p = 12;
    const auto dm = build_design(ts, p);
    const auto ec = empirical_covariance(ts, p);
    const double inv_n = 1.0 / static_cast<double>(dm.rows());
    double worst = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double a = dm.gram()(i, j) * inv_n;
            const double b = ec.r_hat[i >= j ? i - j : j - i];
            worst = std::max(worst, std::abs(a - b));
        }
    }
    const double bound = 3.0 * static_cast<double>(p) / static_cast<double>(dm.rows()) * ec.r_hat[0];
    CHECK(worst <= bound);
}

TEST_CASE("re_check_exhaustive: orthogonal impulse design") {
    // An impulse of height sqrt(n) makes the columns orthonormal after the
    // 1/n scaling, so lambda_min = lambda_max = 1 for every s.
    const double h = std::sqrt(3.0);
    TimeSeries ts{{0.0, 0.0, h, 0.0, 0.0}, 1};
    const auto dm = build_design(ts, 2);
    REQUIRE(dm.rows() == 3);
    for (std::size_t s : {1ul, 2ul}) {
        const auto rep = re_check_exhaustive(dm, s);
        CHECK(rep.lambda_min_s == doctest::Approx(1.0));
        CHECK(rep.lambda_max_s == doctest::Approx(1.0));
        CHECK(rep.satisfied);
    }
}

TEST_CASE("re_check_exhaustive: duplicated columns give exact zero") {
    TimeSeries constant{{2.0, 2.0, 2.0, 2.0, 2.0, 2.0}, 1};
    const auto dm = build_design(constant, 2);
    const auto rep = re_check_exhaustive(dm, 2);
    CHECK(rep.lambda_min_s == 0.0);
    CHECK_FALSE(rep.satisfied);
    CHECK(rep.subsets_checked == 1);
}

TEST_CASE("re_check_exhaustive: monotone in s and counts subsets") {
    const auto ts = simulate(ArModel{{0.3, -0.2}, 1.0}, {}, 120, 20, 808);
    const auto dm = build_design(ts, 8);
    double prev_min = 1e300, prev_max = -1e300;
    std::size_t expect[] = {8, 28, 56};
    for (std::size_t s = 1; s <= 3; ++s) {
        const auto rep = re_check_exhaustive(dm, s);
        CHECK(rep.subsets_checked == expect[s - 1]);
        CHECK(rep.lambda_min_s <= prev_min + 1e-12);
        CHECK(rep.lambda_max_s >= prev_max - 1e-12);
        prev_min = rep.lambda_min_s;
        prev_max = rep.lambda_max_s;
    }
}

TEST_CASE("re_check_exhaustive: AR designs satisfy RE at desk scale") {
    // p = 20, n = 200, s = 3: RE should hold in at least 95 of 100 seeds.
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(mix_seed(31337, seed));
        ArModel m;
        m.theta.assign(20, 0.0);
        for (int k = 0; k < 3; ++k) {
            std::size_t j = rng.below(20);
            m.theta[j] = (0.5 / 3.0) * rng.rademacher();
        }
        m.sigma_w2 = 1.0;
        const auto ts = simulate(m, {}, 220, 200, mix_seed(1, seed));
        const auto dm = build_design(ts, 20);
        const auto rep = re_check_exhaustive(dm, 3);
        if (rep.satisfied) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("re_check_exhaustive: guard refuses oversized scans") {
    const auto ts = simulate(ArModel{{0.2}, 1.0}, {}, 300, 10, 3);
    const auto dm = build_design(ts, 60);
    CHECK_THROWS_AS(re_check_exhaustive(dm, 5), TooLarge);  // C(60,5) ~ 5.46e6
}

TEST_CASE("true covariance interval") {
    const auto [lo, hi] = true_covariance_interval(ArModel{{0.0}, 1.0});
    CHECK(lo == doctest::Approx(1.0 / (8.0 * kPi)));
    CHECK(hi == doctest::Approx(1.0 / (2.0 * kPi)));

    const auto [lo2, hi2] = true_covariance_interval(ArModel{{0.1}, 0.1});
    CHECK(lo2 == doctest::Approx(0.1 / (8.0 * kPi)));
    CHECK(hi2 == doctest::Approx(0.1 / (2.0 * kPi * 0.81)));

    CHECK_THROWS_AS(true_covariance_interval(ArModel{{0.6, 0.5}, 1.0}), NotSufficientlyStable);
}

TEST_CASE("covariance eigenvalues live inside the interval") {
    Rng rng(20250101);
    for (int rep = 0; rep < 10; ++rep) {
        ArModel m;
        m.theta.assign(50, 0.0);
        for (int k = 0; k < 3; ++k) m.theta[rng.below(50)] = (0.5 / 3.0) * rng.rademacher();
        m.sigma_w2 = rng.uniform(0.5, 2.0);
        const auto r = theoretical_autocovariance(m, 49);
        Eigen::MatrixXd R(50, 50);
        for (int i = 0; i < 50; ++i) {
            for (int j = 0; j < 50; ++j) R(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
        }
        R /= 2.0 * kPi;  // the 1/(2*pi) psd convention
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
        const auto [lo, hi] = true_covariance_interval(m);
        CHECK(eig.eigenvalues().minCoeff() >= lo - 1e-9);
        CHECK(eig.eigenvalues().maxCoeff() <= hi + 1e-9);
    }
}

TEST_CASE("theoretical covariance eigenvalues fall within grid psd bounds") {
    Rng rng(606);
    for (int rep = 0; rep < 6; ++rep) {
        const auto m = random_sufficient_stable(rng, 4, rng.uniform(0.2, 0.8));
        const auto r = theoretical_autocovariance(m, 19);
        Eigen::MatrixXd R(20, 20);
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) R(i, j) = r[static_cast<std::size_t>(std::abs(i - j))];
        }
        R /= 2.0 * kPi;
        double inf_s = 1e300, sup_s = 0.0;
        for (int j = 0; j < 4096; ++j) {
            const double w = kPi * j / 4095.0;
            const double f = psd(m, w);
            inf_s = std::min(inf_s, f);
            sup_s = std::max(sup_s, f);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(R);
        // grid extrema approximate the true sup/inf from inside; allow slack
        CHECK(eig.eigenvalues().minCoeff() >= inf_s * (1.0 - 1e-3) - 1e-12);
        CHECK(eig.eigenvalues().maxCoeff() <= sup_s * (1.0 + 1e-3) + 1e-12);
    }
}
