#include "cyberscore/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cyberscore/stats.hpp"

namespace cyber::pricing {

std::vector<std::string> model_factors(FactorModel model) {
    switch (model) {
        case FactorModel::CAPM: return {"mkt"};
        case FactorModel::FFC: return {"mkt", "smb", "hml", "umd"};
        case FactorModel::FF5: return {"mkt", "smb", "hml", "rmw", "cma"};
    }
    return {};
}

std::string model_name(FactorModel model) {
    switch (model) {
        case FactorModel::CAPM: return "CAPM";
        case FactorModel::FFC: return "FFC";
        case FactorModel::FF5: return "FF5";
    }
    return "?";
}

FactorModel parse_model(std::string_view name) {
    if (name == "CAPM" || name == "capm") return FactorModel::CAPM;
    if (name == "FFC" || name == "ffc") return FactorModel::FFC;
    if (name == "FF5" || name == "ff5") return FactorModel::FF5;
    throw std::invalid_argument("unknown factor model '" + std::string(name) + "'");
}

RegressionFit ts_alpha(const portfolio::PortfolioSeries& series, const FactorPanel& factors, FactorModel model,
                       const OlsOptions& opts) {
    auto names = model_factors(model);
    const auto T = static_cast<Eigen::Index>(series.size());
    const auto K = static_cast<Eigen::Index>(names.size());
    if (T <= K + 1) throw std::invalid_argument("ts_alpha: need more months than parameters");
    FactorPanel sub = factors.select(names);
    Eigen::MatrixXd X(T, K);
    Eigen::VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        auto row = sub.row_of(series.months[static_cast<std::size_t>(t)]);
        if (!row) throw std::invalid_argument("factor data missing for " + series.months[static_cast<std::size_t>(t)].iso());
        X.row(t) = sub.values.row(static_cast<Eigen::Index>(*row));
        y(t) = series.returns[static_cast<std::size_t>(t)];
    }
    return ols(with_intercept(X), y, opts);
}

BetaPath rolling_betas(const std::map<YearMonth, double>& asset_returns, const FactorPanel& factors,
                       const std::vector<std::string>& factor_names, int window) {
    if (window < 2) throw std::invalid_argument("rolling window must be >= 2");
    const auto K = static_cast<Eigen::Index>(factor_names.size());
    if (window <= K + 1) throw std::invalid_argument("rolling window too short for the factor count");
    std::vector<std::size_t> cols;
    for (const auto& n : factor_names) {
        auto c = factors.index_of(n);
        if (!c) throw std::invalid_argument("unknown factor '" + n + "'");
        cols.push_back(*c);
    }
    BetaPath out;
    std::vector<std::pair<std::size_t, double>> run;  // (factor row, return) of consecutive months
    std::optional<YearMonth> prev;
    for (const auto& [m, r] : asset_returns) {
        auto row = factors.row_of(m);
        if (!row || (prev && m != prev->plus(1))) run.clear();
        prev = m;
        if (!row) continue;
        run.emplace_back(*row, r);
        if (static_cast<int>(run.size()) < window) continue;
        Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(K + 1, K + 1);
        Eigen::VectorXd xty = Eigen::VectorXd::Zero(K + 1);
        Eigen::VectorXd x(K + 1);
        for (std::size_t j = run.size() - static_cast<std::size_t>(window); j < run.size(); ++j) {
            x(0) = 1.0;
            for (Eigen::Index k = 0; k < K; ++k)
                x(k + 1) = factors.values(static_cast<Eigen::Index>(run[j].first),
                                          static_cast<Eigen::Index>(cols[static_cast<std::size_t>(k)]));
            xtx.noalias() += x * x.transpose();
            xty.noalias() += x * run[j].second;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
        Eigen::VectorXd b = ldlt.solve(xty);
        if (!b.allFinite()) continue;
        out.emplace(m, b.tail(K));
    }
    return out;
}

SecondPassResult fm_second_pass(std::span<const CrossSection> sections, const std::vector<std::string>& exposure_names,
                                double max_condition) {
    if (sections.empty()) throw std::invalid_argument("no cross sections");
    const auto P = sections.front().returns.size();
    const auto K = static_cast<Eigen::Index>(exposure_names.size());
    if (P <= K + 1) throw std::invalid_argument("cross section needs more portfolios than premia");

    SecondPassResult res;
    res.names.push_back("const");
    res.names.insert(res.names.end(), exposure_names.begin(), exposure_names.end());
    std::vector<Eigen::VectorXd> rows;
    Eigen::VectorXd resid_sum = Eigen::VectorXd::Zero(P);
    double adj_sum = 0.0;
    for (const auto& cs : sections) {
        if (cs.returns.size() != P || cs.exposures.rows() != P || cs.exposures.cols() != K)
            throw std::invalid_argument("inconsistent cross section in " + cs.month.iso());
        Eigen::MatrixXd X = with_intercept(cs.exposures);
        double cond = condition_number(X);
        if (!(cond <= max_condition)) {
            res.collinear_months.push_back(cs.month);
            continue;
        }
        auto fit = ols(X, cs.returns, {max_condition, -1});
        rows.push_back(fit.coefficients);
        resid_sum += fit.residuals;
        adj_sum += fit.r_squared_adj;
        res.months.push_back(cs.month);
    }
    if (rows.size() < 2) throw std::runtime_error("fewer than two usable cross sections");
    const auto T = static_cast<Eigen::Index>(rows.size());
    res.gammas.resize(T, K + 1);
    for (Eigen::Index t = 0; t < T; ++t) res.gammas.row(t) = rows[static_cast<std::size_t>(t)].transpose();
    for (Eigen::Index j = 0; j <= K; ++j) {
        std::vector<double> g(res.gammas.col(j).data(), res.gammas.col(j).data() + T);
        auto mt = stats::mean_test(g);
        res.premia.push_back({res.names[static_cast<std::size_t>(j)], mt.mean, mt.std_error, mt.t_stat});
    }
    res.mean_r_squared_adj = adj_sum / static_cast<double>(T);
    res.mape = (resid_sum / static_cast<double>(T)).cwiseAbs().mean();
    return res;
}

std::vector<FmModel> default_fm_models() {
    return {
        {"M.1", {"mkt"}, false},
        {"M.2", {}, true},
        {"M.3", {"mkt"}, true},
        {"M.4", {"mkt", "hml", "smb", "umd"}, true},
        {"M.5", {"mkt", "hml", "smb", "cma", "rmw"}, true},
    };
}

SecondPassResult fama_macbeth(const FmInputs& in, const FmModel& model) {
    if (!in.returns || !in.factors || !in.portfolios) throw std::invalid_argument("fama_macbeth: missing inputs");
    const auto& bins = in.portfolios->bins;
    if (bins.empty() || bins.front().months.empty()) throw std::invalid_argument("fama_macbeth: no portfolios");
    const std::size_t P = bins.size();
    const auto K = static_cast<Eigen::Index>(model.factors.size());

    std::map<std::pair<int, std::string>, double> formation_score;
    for (const auto& f : in.portfolios->formations) formation_score[{f.quarter.index(), f.asset_id}] = f.score;

    std::map<std::string, BetaPath> betas;
    if (K > 0) {
        std::map<std::string, std::map<YearMonth, double>> by_asset;
        for (const auto& r : in.returns->rows()) by_asset[r.asset_id].emplace(r.month, r.excess_return);
        for (const auto& [asset, series] : by_asset)
            betas.emplace(asset, rolling_betas(series, *in.factors, model.factors, in.window));
    }
    auto beta_of = [&](const std::string& asset, YearMonth m) -> const Eigen::VectorXd* {
        auto it = betas.find(asset);
        if (it == betas.end()) return nullptr;
        auto jt = it->second.find(m);
        return jt == it->second.end() ? nullptr : &jt->second;
    };

    std::vector<std::string> names = model.factors;
    if (model.cyber) names.push_back("cyber");
    std::vector<CrossSection> sections;
    const auto& months = bins.front().months;
    for (std::size_t t = 0; t < months.size(); ++t) {
        const YearMonth m = months[t];
        const int q = m.quarter_start().index();
        CrossSection cs{m, Eigen::VectorXd(static_cast<Eigen::Index>(P)),
                        Eigen::MatrixXd(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(names.size()))};
        bool ok = true;
        for (std::size_t p = 0; p < P && ok; ++p) {
            if (bins[p].months[t] != m) throw std::invalid_argument("portfolio months are misaligned");
            const auto& w = bins[p].weights[t];
            const auto pi = static_cast<Eigen::Index>(p);
            cs.returns(pi) = bins[p].returns[t];
            Eigen::Index col = 0;
            if (K > 0) {
                Eigen::VectorXd acc = Eigen::VectorXd::Zero(K);
                double wsum = 0.0;
                for (const auto& [asset, wi] : w) {
                    const auto* b = beta_of(asset, m.plus(-1));
                    if (!b) continue;
                    acc += wi * *b;
                    wsum += wi;
                }
                if (wsum <= 0.0) {
                    ok = false;
                    break;
                }
                cs.exposures.row(pi).head(K) = (acc / wsum).transpose();
                col = K;
            }
            if (model.cyber) {
                double lam = 0.0;
                for (const auto& [asset, wi] : w) {
                    auto it = formation_score.find({q, asset});
                    if (it == formation_score.end()) throw std::logic_error("holding without a formation score");
                    lam += wi * it->second;
                }
                cs.exposures(pi, col) = lam;
            }
        }
        if (ok) sections.push_back(std::move(cs));
    }
    if (sections.empty()) throw std::runtime_error("no month has betas for every portfolio");
    return fm_second_pass(sections, names);
}

GRSResult grs_test(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& factors) {
    const auto T = returns.rows(), N = returns.cols(), K = factors.cols();
    if (factors.rows() != T) throw std::invalid_argument("returns and factors differ in length");
    if (N < 1 || K < 1) throw std::invalid_argument("grs_test needs at least one portfolio and one factor");
    if (T <= N + K) {
        std::ostringstream msg;
        msg << "insufficient span: T=" << T << " must exceed N+K=" << N + K;
        throw std::invalid_argument(msg.str());
    }
    Eigen::MatrixXd X = with_intercept(factors);
    double cond = condition_number(X);
    if (!(cond <= 1e12)) {
        std::ostringstream msg;
        msg << "singular design (condition number " << cond << ")";
        throw std::runtime_error(msg.str());
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    Eigen::MatrixXd B = qr.solve(returns);
    Eigen::MatrixXd E = returns - X * B;
    const double Td = static_cast<double>(T);
    Eigen::MatrixXd sigma = E.transpose() * E / Td;
    Eigen::VectorXd mu = factors.colwise().mean().transpose();
    Eigen::MatrixXd fc = factors.rowwise() - mu.transpose();
    Eigen::MatrixXd omega = fc.transpose() * fc / Td;

    GRSResult r;
    r.N = static_cast<std::size_t>(N);
    r.T = static_cast<std::size_t>(T);
    r.K = static_cast<std::size_t>(K);
    r.alphas = B.row(0).transpose();
    Eigen::LDLT<Eigen::MatrixXd> ls(sigma), lo(omega);
    if (ls.info() != Eigen::Success || !ls.isPositive() || ls.vectorD().minCoeff() <= 0.0)
        throw std::runtime_error("residual covariance is singular");
    if (lo.info() != Eigen::Success || lo.vectorD().minCoeff() <= 0.0)
        throw std::runtime_error("factor covariance is singular");
    double num = r.alphas.dot(ls.solve(r.alphas));
    double den = 1.0 + mu.dot(lo.solve(mu));
    r.statistic = std::max(0.0, static_cast<double>(T - N - K) / static_cast<double>(N) * num / den);
    r.p_value = stats::fisher_f_sf(r.statistic, static_cast<double>(N), static_cast<double>(T - N - K));

    double adj = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
        Eigen::VectorXd y = returns.col(j);
        double sst = (y.array() - y.mean()).square().sum();
        double ssr = E.col(j).squaredNorm();
        double r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
        adj += 1.0 - (1.0 - r2) * static_cast<double>(T - 1) / static_cast<double>(T - K - 1);
    }
    r.mean_r_squared = adj / static_cast<double>(N);
    return r;
}

KMode parse_kmode(std::string_view name) {
    if (name == "original") return KMode::Original;
    if (name == "as-printed") return KMode::AsPrinted;
    throw std::invalid_argument("unknown kmode '" + std::string(name) + "' (expected original or as-printed)");
}

std::string kmode_name(KMode mode) { return mode == KMode::Original ? "original" : "as-printed"; }

namespace {

// Second-moment matrix of [1, variables...] over the first T rows.
struct Moments {
    Eigen::MatrixXd M;  // (1 + V) x (1 + V), index 0 is the constant
    double T = 0.0;
};

using Index = std::vector<Eigen::Index>;

Eigen::MatrixXd pick(const Eigen::MatrixXd& M, const Index& r, const Index& c) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M(r[i], c[j]);
    return out;
}

// Residual cross-product of Y on X and the coefficient matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> regress(const Moments& mo, const Index& y, const Index& x) {
    Eigen::MatrixXd xx = pick(mo.M, x, x), xy = pick(mo.M, x, y);
    Eigen::LLT<Eigen::MatrixXd> llt(xx);
    if (llt.info() != Eigen::Success) throw std::runtime_error("cross-product matrix is not positive definite");
    Eigen::MatrixXd B = llt.solve(xy);
    Eigen::MatrixXd S = pick(mo.M, y, y) - xy.transpose() * B;
    S = 0.5 * (S + S.transpose());
    return {S, B};
}

double unrestricted(const Moments& mo, const Index& y, const Index& x, double prior, KMode mode) {
    if (y.empty()) return 0.0;
    const double T = mo.T, N = static_cast<double>(y.size()), K = static_cast<double>(x.size());
    if (T <= N + K) throw std::invalid_argument("insufficient span for marginal likelihood");
    Index xa{0};
    xa.insert(xa.end(), x.begin(), x.end());
    auto [S, B] = regress(mo, y, xa);
    Eigen::VectorXd alpha = B.row(0).transpose();

    Eigen::VectorXd mu(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) mu(static_cast<Eigen::Index>(i)) = mo.M(0, x[i]) / T;
    Eigen::MatrixXd omega = pick(mo.M, x, x) / T - mu * mu.transpose();
    Eigen::LLT<Eigen::MatrixXd> lo(omega);
    if (lo.info() != Eigen::Success) throw std::runtime_error("cross-product matrix is not positive definite");
    const double sh2 = mu.dot(lo.solve(mu));
    Eigen::MatrixXd sigma = S / T;
    Eigen::LLT<Eigen::MatrixXd> lsg(sigma);
    if (lsg.info() != Eigen::Success) throw std::runtime_error("cross-product matrix is not positive definite");
    const double a = (1.0 + sh2) / T;
    const double W = T * alpha.dot(lsg.solve(alpha)) / (1.0 + sh2);
    const double k = mode == KMode::Original ? sh2 * (prior * prior - 1.0) / N : sh2 / N * (1.0 - prior * prior);

    const double ninf = -std::numeric_limits<double>::infinity();
    const double b1 = 1.0 + a / (a + k) * (W / T);
    const double b2 = 1.0 + k / a;
    if (!(a + k > 0.0) || !(b1 > 0.0) || !(b2 > 0.0)) return ninf;  // only reachable in as-printed mode
    const double log_q = -(T - K) / 2.0 * std::log(b1) - N / 2.0 * std::log(b2);
    return -N / 2.0 * log_det_spd(pick(mo.M, x, x)) - (T - K) / 2.0 * log_det_spd(S) + log_q;
}

double restricted(const Moments& mo, const Index& y, const Index& x) {
    if (y.empty()) return 0.0;
    const double T = mo.T, N = static_cast<double>(y.size()), K = static_cast<double>(x.size());
    if (T <= N + K) throw std::invalid_argument("insufficient span for marginal likelihood");
    auto [S, B] = regress(mo, y, x);
    (void)B;
    return -N / 2.0 * log_det_spd(pick(mo.M, x, x)) - (T - K) / 2.0 * log_det_spd(S);
}

Moments moments_of(const Eigen::MatrixXd& data) {
    Moments mo;
    Eigen::MatrixXd Z = with_intercept(data);
    mo.M = Z.transpose() * Z;
    mo.T = static_cast<double>(data.rows());
    return mo;
}

Index range(Eigen::Index from, Eigen::Index count) {
    Index out;
    for (Eigen::Index i = 0; i < count; ++i) out.push_back(from + i);
    return out;
}

}  // namespace

double log_ml_unrestricted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X, double prior, KMode mode) {
    if (Y.rows() != X.rows()) throw std::invalid_argument("Y and X differ in length");
    Eigen::MatrixXd data(Y.rows(), Y.cols() + X.cols());
    data << Y, X;
    return unrestricted(moments_of(data), range(1, Y.cols()), range(1 + Y.cols(), X.cols()), prior, mode);
}

double log_ml_restricted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X) {
    if (Y.rows() != X.rows()) throw std::invalid_argument("Y and X differ in length");
    Eigen::MatrixXd data(Y.rows(), Y.cols() + X.cols());
    data << Y, X;
    return restricted(moments_of(data), range(1, Y.cols()), range(1 + Y.cols(), X.cols()));
}

double bs_log_marginal_likelihood(const Eigen::MatrixXd& market, const Eigen::MatrixXd& included,
                                  const Eigen::MatrixXd& excluded, double prior, KMode mode) {
    if (!(prior > 1.0)) throw std::invalid_argument("prior multiple must exceed 1");
    if (market.cols() != 1) throw std::invalid_argument("market must be a single column");
    const auto T = market.rows();
    if (included.rows() != T || excluded.rows() != T) throw std::invalid_argument("factor blocks differ in length");
    const auto kf = included.cols(), ke = excluded.cols();
    Eigen::MatrixXd data(T, 1 + kf + ke);
    data << market, included, excluded;
    Moments mo = moments_of(data);
    Index mkt{1}, inc = range(2, kf), exc = range(2 + kf, ke);
    Index mkt_inc = mkt;
    mkt_inc.insert(mkt_inc.end(), inc.begin(), inc.end());
    return unrestricted(mo, inc, mkt, prior, mode) + restricted(mo, exc, mkt_inc);
}

std::vector<double> posterior_probabilities(std::span<const double> log_ml) {
    if (log_ml.empty()) throw std::invalid_argument("no models to compare");
    double top = -std::numeric_limits<double>::infinity();
    for (double v : log_ml) {
        if (std::isnan(v)) throw std::invalid_argument("NaN marginal likelihood");
        top = std::max(top, v);
    }
    if (!std::isfinite(top)) throw std::runtime_error("all marginal likelihoods are zero (log = -inf)");
    std::vector<double> p(log_ml.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p[i] = std::exp(log_ml[i] - top);
    for (double& v : p) v /= total;
    return p;
}

std::string subset_label(unsigned mask, const std::vector<std::string>& candidates) {
    std::string out = "mkt";
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (mask & (1u << i)) out += "+" + candidates[i];
    return out;
}

ModelPosterior bs_posteriors(const FactorPanel& factors, const std::string& market,
                             const std::vector<std::string>& candidates, const BsOptions& options) {
    if (!(options.prior > 1.0)) throw std::invalid_argument("prior multiple must exceed 1");
    if (candidates.empty()) throw std::invalid_argument("no candidate factors");
    if (candidates.size() > 16) throw std::invalid_argument("too many candidate factors");
    for (const auto& c : candidates)
        if (c == market) throw std::invalid_argument("market factor listed as a candidate");
    std::vector<std::string> cols{market};
    cols.insert(cols.end(), candidates.begin(), candidates.end());
    FactorPanel sub = factors.select(cols);
    const auto T = sub.values.rows();
    const auto C = static_cast<unsigned>(candidates.size());

    ModelPosterior out;
    out.candidates = candidates;
    for (unsigned mask = 0; mask < (1u << C); ++mask) out.subsets.push_back(mask);

    Eigen::MatrixXd Z = with_intercept(sub.values);
    auto snapshot = [&](Eigen::Index rows) {
        Moments mo;
        mo.M = Z.topRows(rows).transpose() * Z.topRows(rows);
        mo.T = static_cast<double>(rows);
        std::vector<double> lml;
        for (unsigned mask : out.subsets) {
            Index inc, exc, mkt{1};
            for (unsigned i = 0; i < C; ++i) ((mask >> i) & 1u ? inc : exc).push_back(2 + static_cast<Eigen::Index>(i));
            Index mkt_inc = mkt;
            mkt_inc.insert(mkt_inc.end(), inc.begin(), inc.end());
            lml.push_back(unrestricted(mo, inc, mkt, options.prior, options.kmode) + restricted(mo, exc, mkt_inc));
        }
        PosteriorSnapshot s;
        s.end_month = sub.months[static_cast<std::size_t>(rows - 1)];
        s.probabilities = posterior_probabilities(lml);
        s.cumulative.assign(C, 0.0);
        for (std::size_t j = 0; j < out.subsets.size(); ++j)
            for (unsigned i = 0; i < C; ++i)
                if ((out.subsets[j] >> i) & 1u) s.cumulative[i] += s.probabilities[j];
        out.path.push_back(std::move(s));
    };
    if (options.expanding) {
        if (options.min_window > T) throw std::invalid_argument("insufficient span for the first expanding window");
        for (Eigen::Index rows = options.min_window; rows <= T; ++rows) snapshot(rows);
    } else {
        snapshot(T);
    }
    return out;
}

FeResult fe_determinants(std::span<const PanelRow> rows, const std::vector<std::string>& names, FixedEffects fe) {
    if (rows.empty()) throw std::invalid_argument("empty panel");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    FeResult res;

    std::map<std::string, int> group_id, firm_id;
    std::set<int> year_set;
    for (const auto& r : rows) {
        if (static_cast<Eigen::Index>(r.x.size()) != p) throw std::invalid_argument("regressor count mismatch");
        const auto& g = fe == FixedEffects::FirmYear ? r.firm : r.industry;
        group_id.emplace(g, static_cast<int>(group_id.size()));
        firm_id.emplace(r.firm, static_cast<int>(firm_id.size()));
        year_set.insert(r.year);
    }
    std::vector<int> years(year_set.begin(), year_set.end());
    const auto ny = static_cast<Eigen::Index>(years.size());

    // Columns: named regressors, then year dummies for all but the first year.
    Eigen::MatrixXd X(n, p + std::max<Eigen::Index>(ny - 1, 0));
    Eigen::VectorXd y(n);
    std::vector<int> grp(static_cast<std::size_t>(n)), clus(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        y(i) = r.y;
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = r.x[static_cast<std::size_t>(j)];
        for (Eigen::Index j = 1; j < ny; ++j) X(i, p + j - 1) = r.year == years[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
        grp[static_cast<std::size_t>(i)] = group_id.at(fe == FixedEffects::FirmYear ? r.firm : r.industry);
        clus[static_cast<std::size_t>(i)] = firm_id.at(r.firm);
    }

    const auto G = static_cast<Eigen::Index>(group_id.size());
    auto demean = [&](Eigen::Ref<Eigen::VectorXd> v) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(G), cnt = Eigen::VectorXd::Zero(G);
        for (Eigen::Index i = 0; i < n; ++i) {
            sum(grp[static_cast<std::size_t>(i)]) += v(i);
            cnt(grp[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (Eigen::Index i = 0; i < n; ++i) v(i) -= sum(grp[static_cast<std::size_t>(i)]) / cnt(grp[static_cast<std::size_t>(i)]);
    };
    Eigen::MatrixXd Xd = X;
    Eigen::VectorXd yd = y;
    demean(yd);
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) demean(Xd.col(j));

    std::vector<Eigen::Index> keep;
    std::vector<std::string> kept_names;
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
        double before = X.col(j).norm(), after = Xd.col(j).norm();
        bool absorbed = after <= 1e-10 * std::max(1.0, before);
        // Absorption by the year dummies themselves.
        if (!absorbed && j < p && ny > 1) {
            Eigen::MatrixXd D = Xd.rightCols(ny - 1);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
            Eigen::VectorXd resid = Xd.col(j) - D * qr.solve(Xd.col(j));
            absorbed = resid.norm() <= 1e-10 * std::max(1.0, before);
        }
        if (absorbed) {
            if (j < p) {
                res.dropped.push_back(names[static_cast<std::size_t>(j)]);
                res.warnings.push_back("regressor '" + names[static_cast<std::size_t>(j)] +
                                       "' is absorbed by the fixed effects and was dropped");
            }
            continue;
        }
        keep.push_back(j);
        if (j < p) kept_names.push_back(names[static_cast<std::size_t>(j)]);
    }
    const auto k = static_cast<Eigen::Index>(keep.size());
    const auto kp = static_cast<Eigen::Index>(kept_names.size());
    if (kp == 0) throw std::runtime_error("every regressor is absorbed by the fixed effects");
    Eigen::MatrixXd Z(n, k);
    for (Eigen::Index j = 0; j < k; ++j) Z.col(j) = Xd.col(keep[static_cast<std::size_t>(j)]);
    const double dof = static_cast<double>(n - k - G);
    if (dof <= 0) throw std::invalid_argument("not enough observations for the fixed-effects model");

    double cond = condition_number(Z);
    if (!(cond <= 1e12)) {
        std::ostringstream msg;
        msg << "singular design (condition number " << cond << ")";
        throw std::runtime_error(msg.str());
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::VectorXd b = qr.solve(yd);
    Eigen::VectorXd u = yd - Z * b;
    Eigen::MatrixXd bread = (Z.transpose() * Z).inverse();

    const auto nc = static_cast<Eigen::Index>(firm_id.size());
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(nc, k);
    for (Eigen::Index i = 0; i < n; ++i) score.row(clus[static_cast<std::size_t>(i)]) += Z.row(i) * u(i);
    Eigen::MatrixXd meat = score.transpose() * score;
    double gc = nc > 1 ? static_cast<double>(nc) / static_cast<double>(nc - 1) : 1.0;
    Eigen::MatrixXd v_cl = gc * bread * meat * bread;
    Eigen::MatrixXd v_ols = bread * (u.squaredNorm() / dof);

    res.names = kept_names;
    res.coefficients = b.head(kp);
    res.clustered_se = v_cl.diagonal().head(kp).cwiseMax(0.0).cwiseSqrt();
    res.unclustered_se = v_ols.diagonal().head(kp).cwiseMax(0.0).cwiseSqrt();
    res.t_stats.resize(kp);
    for (Eigen::Index j = 0; j < kp; ++j)
        res.t_stats(j) = res.clustered_se(j) > 0.0 ? res.coefficients(j) / res.clustered_se(j) : 0.0;
    double sst = yd.squaredNorm();
    res.r_squared_within = sst > 0.0 ? 1.0 - u.squaredNorm() / sst : 1.0;
    res.n_obs = static_cast<std::size_t>(n);
    res.n_clusters = static_cast<std::size_t>(nc);
    return res;
}

}  // namespace cyber::pricing
