#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "cyberscore/pricing.hpp"
#include "cyberscore/stats.hpp"
#include "support.hpp"

using namespace cyber;
using namespace cyber::pricing;

namespace {

FactorPanel factor_panel(Rng& rng, int T, std::vector<std::string> names) {
    FactorPanel f;
    for (int t = 0; t < T; ++t) f.months.push_back(YearMonth{2000, 1}.plus(t));
    f.names = std::move(names);
    f.values = 0.04 * testing::random_matrix(rng, T, static_cast<Eigen::Index>(f.names.size()));
    f.values.array() += 0.005;
    return f;
}

portfolio::PortfolioSeries as_series(const FactorPanel& f, const Eigen::VectorXd& r) {
    portfolio::PortfolioSeries s;
    s.months = f.months;
    s.returns.assign(r.data(), r.data() + r.size());
    return s;
}

// Scalar re-derivation of the unrestricted and restricted blocks for one
// test asset and one factor.
double scalar_ml_u(const Eigen::VectorXd& y, const Eigen::VectorXd& x, double prior, bool original) {
    const double T = static_cast<double>(y.size());
    const double xb = x.mean(), yb = y.mean();
    double sxx = 0, sxy = 0, xx = 0;
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        sxx += (x(t) - xb) * (x(t) - xb);
        sxy += (x(t) - xb) * (y(t) - yb);
        xx += x(t) * x(t);
    }
    const double b = sxy / sxx, a0 = yb - b * xb;
    double S = 0;
    for (Eigen::Index t = 0; t < y.size(); ++t) S += std::pow(y(t) - a0 - b * x(t), 2);
    const double sh2 = xb * xb / (sxx / T);
    const double a = (1 + sh2) / T;
    const double W = T * a0 * a0 / (S / T) / (1 + sh2);
    const double k = original ? sh2 * (prior * prior - 1) : sh2 * (1 - prior * prior);
    const double b1 = 1 + a / (a + k) * W / T, b2 = 1 + k / a;
    if (a + k <= 0 || b1 <= 0 || b2 <= 0) return -INFINITY;
    return -0.5 * std::log(xx) - (T - 1) / 2 * std::log(S) - (T - 1) / 2 * std::log(b1) - 0.5 * std::log(b2);
}

double scalar_ml_r(const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
    const double T = static_cast<double>(y.size());
    const double b = x.dot(y) / x.dot(x);
    return -0.5 * std::log(x.dot(x)) - (T - 1) / 2 * std::log((y - b * x).squaredNorm());
}

// Hand GRS for two portfolios and one factor.
double hand_grs(const Eigen::MatrixXd& R, const Eigen::VectorXd& f) {
    const double T = static_cast<double>(f.size());
    const double fb = f.mean();
    const double sff = (f.array() - fb).square().sum();
    double alpha[2], e[2][400];
    for (int i = 0; i < 2; ++i) {
        const double rb = R.col(i).mean();
        const double b = ((f.array() - fb) * (R.col(i).array() - rb)).sum() / sff;
        alpha[i] = rb - b * fb;
        for (Eigen::Index t = 0; t < f.size(); ++t) e[i][t] = R(t, i) - alpha[i] - b * f(t);
    }
    double s11 = 0, s12 = 0, s22 = 0;
    for (Eigen::Index t = 0; t < f.size(); ++t) {
        s11 += e[0][t] * e[0][t] / T;
        s12 += e[0][t] * e[1][t] / T;
        s22 += e[1][t] * e[1][t] / T;
    }
    const double det = s11 * s22 - s12 * s12;
    const double q = (alpha[0] * alpha[0] * s22 - 2 * alpha[0] * alpha[1] * s12 + alpha[1] * alpha[1] * s11) / det;
    const double omega = sff / T;
    return (T - 2 - 1) / 2 * q / (1 + fb * fb / omega);
}

}  // namespace

TEST_SUITE("pricing") {

TEST_CASE("time-series alpha: exact fits") {
    Rng rng(1);
    auto f = factor_panel(rng, 60, {"mkt", "smb", "hml", "umd", "rmw", "cma"});
    Eigen::VectorXd mkt = f.column("mkt");
    auto fit = ts_alpha(as_series(f, 0.5 * mkt), f, FactorModel::CAPM);
    CHECK(std::abs(fit.coefficients(0)) < 1e-12);
    CHECK(fit.coefficients(1) == doctest::Approx(0.5));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.exact_fit);

    Eigen::VectorXd shifted = mkt.array() + 0.003;
    auto fit2 = ts_alpha(as_series(f, shifted), f, FactorModel::FF5);
    CHECK(fit2.coefficients(0) == doctest::Approx(0.003).epsilon(1e-10));
    CHECK(std::isinf(fit2.t_stats(0)));
}

TEST_CASE("time-series alpha: residuals orthogonal to factors") {
    Rng rng(2);
    auto f = factor_panel(rng, 120, {"mkt", "smb", "hml", "umd", "rmw", "cma"});
    Eigen::VectorXd r = 0.02 * testing::random_matrix(rng, 120, 1);
    for (auto model : {FactorModel::CAPM, FactorModel::FFC, FactorModel::FF5}) {
        auto fit = ts_alpha(as_series(f, r), f, model);
        CHECK(std::abs(fit.residuals.sum()) < 1e-10);
        for (const auto& name : model_factors(model)) CHECK(std::abs(f.column(name).dot(fit.residuals)) < 1e-8);
        CHECK(fit.coefficients.size() == static_cast<Eigen::Index>(model_factors(model).size()) + 1);
    }
    CHECK(parse_model("ff5") == FactorModel::FF5);
    CHECK_THROWS(parse_model("apt"));
}

TEST_CASE("rolling betas") {
    Rng rng(3);
    auto f = factor_panel(rng, 40, {"mkt"});
    std::map<YearMonth, double> same;
    for (int t = 0; t < 40; ++t) same[f.months[static_cast<std::size_t>(t)]] = f.values(t, 0);
    auto path = rolling_betas(same, f, {"mkt"}, 24);
    CHECK(path.size() == 17);
    CHECK(path.begin()->first == f.months[23]);
    for (const auto& [_, b] : path) CHECK(b(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rolling_betas(same, f, {"mkt"}, 41).empty());

    std::map<YearMonth, double> noisy;
    for (int t = 0; t < 40; ++t) noisy[f.months[static_cast<std::size_t>(t)]] = 1.4 * f.values(t, 0) + 0.002 * rng.normal();
    for (const auto& [_, b] : rolling_betas(noisy, f, {"mkt"}, 24)) CHECK(std::abs(b(0) - 1.4) < 0.1);
}

TEST_CASE("second pass: exact pricing and permutation invariance") {
    Rng rng(4);
    std::vector<CrossSection> cs;
    for (int t = 0; t < 30; ++t) {
        CrossSection c{YearMonth{2010, 1}.plus(t), Eigen::VectorXd(20), Eigen::MatrixXd(20, 1)};
        for (int p = 0; p < 20; ++p) {
            c.exposures(p, 0) = 0.3 + 0.02 * p + 0.01 * rng.normal();
            c.returns(p) = 0.0 + 0.04 * c.exposures(p, 0);
        }
        cs.push_back(c);
    }
    auto res = fm_second_pass(cs, {"cyber"});
    CHECK(res.premia[1].mean == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(std::abs(res.premia[0].mean) < 1e-12);
    CHECK(res.mape < 1e-12);

    Rng noise(5);
    for (auto& c : cs)
        for (int p = 0; p < 20; ++p) c.returns(p) += 0.01 * noise.normal();
    auto base = fm_second_pass(cs, {"cyber"});
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    noise.shuffle(perm.begin(), perm.end());
    auto shuffled = cs;
    for (std::size_t t = 0; t < cs.size(); ++t)
        for (int p = 0; p < 20; ++p) {
            shuffled[t].returns(p) = cs[t].returns(perm[static_cast<std::size_t>(p)]);
            shuffled[t].exposures(p, 0) = cs[t].exposures(perm[static_cast<std::size_t>(p)], 0);
        }
    auto other = fm_second_pass(shuffled, {"cyber"});
    CHECK((base.gammas - other.gammas).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("second pass: collinear months are flagged") {
    std::vector<CrossSection> cs;
    for (int t = 0; t < 5; ++t) {
        CrossSection c{YearMonth{2010, 1}.plus(t), Eigen::VectorXd::LinSpaced(20, 0, 1), Eigen::MatrixXd(20, 1)};
        c.exposures.col(0) = Eigen::VectorXd::LinSpaced(20, 1, 2);
        if (t == 2) c.exposures.col(0).setConstant(0.5);
        cs.push_back(c);
    }
    auto res = fm_second_pass(cs, {"x"});
    REQUIRE(res.collinear_months.size() == 1);
    CHECK(res.collinear_months[0] == YearMonth{2010, 3});
    CHECK(res.months.size() == 4);
}

TEST_CASE("second pass: size under a zero premium") {
    int inside = 0;
    const int reps = 300;
    for (int s = 0; s < reps; ++s) {
        Rng rng(1000 + static_cast<std::uint64_t>(s));
        Eigen::VectorXd lam(20);
        for (int p = 0; p < 20; ++p) lam(p) = 0.3 + 0.02 * p;
        std::vector<CrossSection> cs;
        for (int t = 0; t < 120; ++t) {
            CrossSection c{YearMonth{2000, 1}.plus(t), Eigen::VectorXd(20), lam};
            const double common = 0.03 * rng.normal();
            for (int p = 0; p < 20; ++p) c.returns(p) = 0.005 + common + 0.02 * rng.normal();
            cs.push_back(c);
        }
        auto res = fm_second_pass(cs, {"cyber"});
        if (std::abs(res.premia[1].t_stat) < 1.96) ++inside;
    }
    CHECK(inside >= static_cast<int>(0.93 * reps));
}

TEST_CASE("GRS: hand oracle, zero alpha, scale invariance, span") {
    Rng rng(6);
    const int T = 120;
    Eigen::VectorXd f = 0.04 * testing::random_matrix(rng, T, 1);
    f.array() += 0.006;
    Eigen::MatrixXd R(T, 2);
    R.col(0) = 0.001 + 0.9 * f.array() + 0.02 * testing::random_matrix(rng, T, 1).array();
    R.col(1) = -0.002 + 1.2 * f.array() + 0.03 * testing::random_matrix(rng, T, 1).array();
    auto g = grs_test(R, f);
    CHECK(std::abs(g.statistic - hand_grs(R, f)) < 1e-10);
    CHECK(g.p_value == doctest::Approx(stats::fisher_f_sf(g.statistic, 2, T - 3)));

    auto scaled = grs_test(3.7 * R, 3.7 * f);
    CHECK(std::abs(scaled.statistic - g.statistic) < 1e-9);

    // Residuals orthogonal to [1, f] give alpha exactly zero.
    Eigen::MatrixXd X = with_intercept(f);
    Eigen::MatrixXd E = testing::random_matrix(rng, T, 2);
    E -= X * (X.transpose() * X).ldlt().solve(X.transpose() * E);
    Eigen::MatrixXd R0 = f * Eigen::RowVector2d(0.8, 1.1) + 0.01 * E;
    auto z = grs_test(R0, f);
    CHECK(z.statistic < 1e-20);
    CHECK(z.p_value == doctest::Approx(1.0));

    CHECK_THROWS_WITH(grs_test(R.topRows(3), f.head(3)), doctest::Contains("insufficient span"));
}

TEST_CASE("Bayesian blocks match a scalar re-derivation") {
    Rng rng(7);
    const int T = 90;
    Eigen::VectorXd x = 0.04 * testing::random_matrix(rng, T, 1);
    x.array() += 0.008;
    Eigen::VectorXd y = 0.002 + 0.5 * x.array() + 0.03 * testing::random_matrix(rng, T, 1).array();
    for (double prior : {1.25, 1.5, 3.0}) {
        CHECK(log_ml_unrestricted(y, x, prior, KMode::Original) ==
              doctest::Approx(scalar_ml_u(y, x, prior, true)).epsilon(1e-12));
        const double printed = log_ml_unrestricted(y, x, prior, KMode::AsPrinted);
        const double oracle = scalar_ml_u(y, x, prior, false);
        if (std::isinf(oracle)) CHECK(std::isinf(printed));
        else CHECK(printed == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(log_ml_restricted(y, x) == doctest::Approx(scalar_ml_r(y, x)).epsilon(1e-12));

    Eigen::MatrixXd none(T, 0);
    CHECK(bs_log_marginal_likelihood(x, y, none) == doctest::Approx(scalar_ml_u(y, x, 1.25, true)).epsilon(1e-12));
    CHECK(bs_log_marginal_likelihood(x, none, y) == doctest::Approx(scalar_ml_r(y, x)).epsilon(1e-12));
    // Identical blocks give identical values.
    CHECK(bs_log_marginal_likelihood(x, y, none) == bs_log_marginal_likelihood(x, y, none));
    CHECK_THROWS(bs_log_marginal_likelihood(x, y, none, 1.0));
}

TEST_CASE("posterior normalization") {
    std::vector<double> same(8, -123.4);
    for (double p : posterior_probabilities(same)) CHECK(p == 1.0 / 8.0);
    std::vector<double> v{-1000.0, -1002.5, -999.1, -1010.0};
    auto p = posterior_probabilities(v);
    auto shifted = v;
    for (auto& x : shifted) x += 987.0;
    auto q = posterior_probabilities(shifted);
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(std::abs(p[i] - q[i]) < 1e-14);
        sum += p[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    std::vector<double> dead{-INFINITY, -INFINITY};
    CHECK_THROWS(posterior_probabilities(dead));
    std::vector<double> one_dead{-INFINITY, -3.0};
    CHECK(posterior_probabilities(one_dead)[1] == 1.0);
}

TEST_CASE("posterior paths sum to one and label subsets") {
    Rng rng(8);
    auto f = factor_panel(rng, 80, {"mkt", "f1", "f2", "f3"});
    BsOptions o;
    o.expanding = true;
    auto post = bs_posteriors(f, "mkt", {"f1", "f2", "f3"}, o);
    CHECK(post.subsets.size() == 8);
    CHECK(post.path.size() == 80 - 36 + 1);
    for (const auto& s : post.path) {
        double sum = 0;
        for (double p : s.probabilities) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);
        for (double c : s.cumulative) CHECK((c >= 0.0 && c <= 1.0 + 1e-12));
    }
    CHECK(subset_label(5u, post.candidates) == "mkt+f1+f3");
    CHECK(parse_kmode("as-printed") == KMode::AsPrinted);
    CHECK_THROWS(bs_posteriors(f, "mkt", {"mkt"}, o));
}

TEST_CASE("fixed effects: manual two-way demeaning on a 3x3 panel") {
    std::vector<PanelRow> rows;
    const double y[3][3] = {{1.0, 2.5, 2.0}, {0.3, 0.9, 1.7}, {4.0, 3.1, 5.2}};
    const double x1[3][3] = {{0.2, 0.7, 0.1}, {1.5, 1.1, 0.4}, {0.9, 0.3, 1.2}};
    const double x2[3][3] = {{2.0, 1.0, 0.5}, {0.1, 0.6, 0.8}, {1.4, 2.2, 0.3}};
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 3; ++t)
            rows.push_back({"F" + std::to_string(i), "I", 2000 + t, y[i][t], {x1[i][t], x2[i][t]}});
    auto res = fe_determinants(rows, {"x1", "x2"}, FixedEffects::FirmYear);

    auto demean = [](const double (&a)[3][3]) {
        Eigen::VectorXd out(9);
        double grand = 0, ri[3] = {}, ct[3] = {};
        for (int i = 0; i < 3; ++i)
            for (int t = 0; t < 3; ++t) grand += a[i][t] / 9, ri[i] += a[i][t] / 3, ct[t] += a[i][t] / 3;
        for (int i = 0; i < 3; ++i)
            for (int t = 0; t < 3; ++t) out(3 * i + t) = a[i][t] - ri[i] - ct[t] + grand;
        return out;
    };
    Eigen::MatrixXd X(9, 2);
    X.col(0) = demean(x1);
    X.col(1) = demean(x2);
    Eigen::VectorXd yy = demean(y);
    Eigen::VectorXd b = (X.transpose() * X).ldlt().solve(X.transpose() * yy);
    REQUIRE(res.coefficients.size() == 2);
    CHECK(std::abs(res.coefficients(0) - b(0)) < 1e-10);
    CHECK(std::abs(res.coefficients(1) - b(1)) < 1e-10);
    CHECK(res.n_clusters == 3);
}

TEST_CASE("fixed effects: absorbed regressors are dropped") {
    Rng rng(9);
    std::vector<PanelRow> rows;
    for (int i = 0; i < 20; ++i) {
        const double firm_level = rng.normal();
        for (int t = 0; t < 5; ++t) {
            const double x = rng.normal();
            rows.push_back({"F" + std::to_string(i), i % 2 ? "Tech" : "Retail", 2010 + t,
                            0.5 * x + firm_level + 0.1 * rng.normal(), {x, firm_level, static_cast<double>(t)}});
        }
    }
    auto res = fe_determinants(rows, {"x", "firm_level", "trend"}, FixedEffects::FirmYear);
    CHECK(res.names == std::vector<std::string>{"x"});
    CHECK(res.dropped.size() == 2);
    CHECK_FALSE(res.warnings.empty());
    CHECK(res.coefficients(0) == doctest::Approx(0.5).epsilon(0.05));
    auto ind = fe_determinants(rows, {"x", "firm_level", "trend"}, FixedEffects::IndustryYear);
    CHECK(ind.names == std::vector<std::string>{"x", "firm_level"});
}

}
