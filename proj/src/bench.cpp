#include "sparsear/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "sparsear/design.hpp"
#include "sparsear/errors.hpp"
#include "sparsear/rng.hpp"

namespace sparsear {

namespace {

constexpr std::uint64_t kThetaStream = 0x7468657461ULL;
constexpr std::uint64_t kDataStream = 0x64617461ULL;

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

std::size_t default_omp_budget(std::size_t s) {
    const double v = static_cast<double>(s) * std::log(static_cast<double>(s));
    return std::max<std::size_t>(s, static_cast<std::size_t>(std::ceil(v)));
}

double normalized_mse(const std::vector<double>& est, const std::vector<double>& truth) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = est[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    return num / den;
}

double l2_error(const std::vector<double>& est, const std::vector<double>& truth) {
    double num = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = est[i] - truth[i];
        num += d * d;
    }
    return std::sqrt(num);
}

}  // namespace

double GammaPolicy::resolve(std::size_t n, std::size_t p) const {
    if (kind == Kind::fixed) return value;
    return auto_gamma(n, p, value);
}

ArModel sweep_model(const SweepSpec& spec, std::size_t seed_index) {
    if (spec.s < 1 || spec.s > spec.p) throw InvalidConfig("sweep: need 1 <= s <= p");
    if (!(spec.eta > 0.0 && spec.eta < 1.0)) throw InvalidConfig("sweep: eta must be in (0, 1)");
    Rng rng(mix_seed(spec.master_seed, kThetaStream, seed_index));

    // Partial Fisher-Yates draw of an s-subset of {0..p-1}.
    std::vector<std::size_t> idx(spec.p);
    for (std::size_t i = 0; i < spec.p; ++i) idx[i] = i;
    for (std::size_t i = 0; i < spec.s; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(spec.p - i));
        std::swap(idx[i], idx[j]);
    }

    ArModel model;
    model.theta.assign(spec.p, 0.0);
    model.sigma_w2 = spec.sigma_w2;
    const double mag = (1.0 - spec.eta) / static_cast<double>(spec.s);
    for (std::size_t i = 0; i < spec.s; ++i) {
        model.theta[idx[i]] = mag * rng.rademacher();
    }
    return model;
}

TimeSeries sweep_series(const SweepSpec& spec, std::size_t seed_index, std::size_t n) {
    const ArModel model = sweep_model(spec, seed_index);
    InnovationSpec innov{InnovationSpec::Kind::gaussian, spec.sigma_w2};
    return simulate(model, innov, n + spec.p, default_burn_in(spec.p),
                    mix_seed(spec.master_seed, kDataStream ^ seed_index, n));
}

EstimatorConfig sweep_config(const SweepSpec& spec, std::size_t n) {
    EstimatorConfig cfg;
    cfg.gamma = spec.gamma_policy.resolve(n, spec.p);
    cfg.s_star = spec.s_star ? *spec.s_star : default_omp_budget(spec.s);
    cfg.sparsity = spec.s;
    return cfg;
}

SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.seeds < 1) throw InvalidConfig("sweep: seeds must be >= 1");
    if (spec.n_grid.empty() || spec.methods.empty()) {
        throw InvalidConfig("sweep: n_grid and methods must be non-empty");
    }
    for (std::size_t n : spec.n_grid) {
        if (n < 1) throw InvalidConfig("sweep: every n must be >= 1");
    }

    SweepResult out;
    out.spec = spec;
    const std::size_t n_cells = spec.seeds * spec.n_grid.size();
    out.records.resize(n_cells * spec.methods.size());

    // One task per (seed, n): all methods share the simulated record, and the
    // record slots are fixed by cell index so worker count cannot reorder
    // anything.
    auto run_cell = [&](std::size_t cell) {
        const std::size_t seed = cell / spec.n_grid.size();
        const std::size_t n_idx = cell % spec.n_grid.size();
        const std::size_t n = spec.n_grid[n_idx];
        const ArModel truth = sweep_model(spec, seed);
        const TimeSeries series = sweep_series(spec, seed, n);
        const EstimatorConfig cfg = sweep_config(spec, n);

        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            SweepRecord rec;
            rec.method = spec.methods[mi];
            rec.n = n;
            rec.seed = seed;
            try {
                const FitResult fr = fit(series, spec.p, spec.methods[mi], cfg);
                rec.mse = normalized_mse(fr.model.theta, truth.theta);
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.mse = std::numeric_limits<double>::quiet_NaN();
                rec.ok = false;
                rec.error = e.what();
            }
            out.records[cell * spec.methods.size() + mi] = std::move(rec);
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, spec.workers);
    if (workers == 1) {
        for (std::size_t cell = 0; cell < n_cells; ++cell) run_cell(cell);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    const std::size_t cell = next.fetch_add(1);
                    if (cell >= n_cells) return;
                    run_cell(cell);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Reduce by (method, n) key in grid order.
    for (Method m : spec.methods) {
        for (std::size_t n : spec.n_grid) {
            std::vector<double> vals;
            std::size_t failures = 0;
            for (const auto& rec : out.records) {
                if (rec.method != m || rec.n != n) continue;
                if (rec.ok) {
                    vals.push_back(rec.mse);
                } else {
                    ++failures;
                }
            }
            SweepSummaryRow row;
            row.method = m;
            row.n = n;
            row.median = quantile(vals, 0.5);
            row.q1 = quantile(vals, 0.25);
            row.q3 = quantile(vals, 0.75);
            row.failures = failures;
            out.summary.push_back(row);
        }
    }
    return out;
}

ScalingReport error_scaling_check(std::size_t p, std::size_t s, double eta,
                                  const std::vector<ScalingPair>& pairs, std::size_t seeds,
                                  const GammaPolicy& gamma_policy, std::uint64_t master_seed) {
    SweepSpec spec;
    spec.p = p;
    spec.s = s;
    spec.eta = eta;
    spec.seeds = seeds;
    spec.methods = {Method::lasso};
    spec.gamma_policy = gamma_policy;
    spec.master_seed = master_seed;
    for (const auto& pr : pairs) {
        spec.n_grid.push_back(pr.n);
        spec.n_grid.push_back(pr.n2);
    }
    std::sort(spec.n_grid.begin(), spec.n_grid.end());
    spec.n_grid.erase(std::unique(spec.n_grid.begin(), spec.n_grid.end()), spec.n_grid.end());

    // The sweep records normalized MSE; medians of sqrt(mse)*||theta|| and of
    // the l2 error order identically per seed only if ||theta|| is constant,
    // which the equal-magnitude draw guarantees. Compute l2 directly anyway.
    ScalingReport rep;
    rep.pairs = pairs;

    auto median_l2_at = [&](std::size_t n) {
        std::vector<double> errs;
        const EstimatorConfig cfg = sweep_config(spec, n);
        for (std::size_t seed = 0; seed < seeds; ++seed) {
            const ArModel truth = sweep_model(spec, seed);
            const TimeSeries series = sweep_series(spec, seed, n);
            const FitResult fr = fit(series, p, Method::lasso, cfg);
            errs.push_back(l2_error(fr.model.theta, truth.theta));
        }
        return quantile(errs, 0.5);
    };

    bool pass = true;
    for (const auto& pr : pairs) {
        const double lo = median_l2_at(pr.n);
        const double hi = median_l2_at(pr.n2);
        const double ratio = lo / hi;
        rep.medians_lo.push_back(lo);
        rep.medians_hi.push_back(hi);
        rep.ratios.push_back(ratio);
        if (pr.n == pr.n2) {
            pass = pass && std::abs(ratio - 1.0) < 1e-12;
        } else {
            pass = pass && ratio >= 1.2 && ratio <= 1.7;
        }
    }
    rep.pass = pass;
    return rep;
}

std::vector<GofTableRow> gof_table(const TimeSeries& fit_series, const TimeSeries& test_series,
                                   std::size_t p, const std::vector<Method>& methods,
                                   const EstimatorConfig& cfg, std::size_t grid,
                                   const ArModel* true_model) {
    std::vector<GofTableRow> rows;

    auto score = [&](const std::string& label, const ArModel& model, bool stable) {
        GofTableRow row;
        row.label = label;
        row.stable = stable;
        try {
            const ResidualSeries fit_res = residuals(fit_series, model);
            const double s2 = std::max(sample_variance(fit_res.residuals), 1e-300);
            const ResidualSeries test_res =
                residuals(test_series, model).with_null(NullCdf{0.0, s2});
            row.report.ks = ks_statistic(test_res);
            row.report.cvm = cvm_statistic(test_res);
            row.report.ad = ad_statistic(test_res);
            if (stable) {
                row.report.scvm = scvm_statistic(test_series, model, grid);
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        return row;
    };

    if (true_model != nullptr) {
        rows.push_back(score("true", *true_model, is_stable(true_model->theta)));
    }
    for (Method m : methods) {
        GofTableRow row;
        try {
            const FitResult fr = fit(fit_series, p, m, cfg);
            row = score(method_name(m), fr.model, fr.stable);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.label = method_name(m);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace sparsear
