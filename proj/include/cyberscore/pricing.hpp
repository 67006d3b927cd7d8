// Asset-pricing tests: time-series alphas, Fama-MacBeth two-pass
// regressions, the GRS joint-alpha test, a Bayesian factor-subset scan and
// fixed-effects panel regressions with firm-clustered standard errors.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyberscore/linalg.hpp"
#include "cyberscore/panel.hpp"
#include "cyberscore/portfolio.hpp"

namespace cyber::pricing {

// ---- time-series alphas ----------------------------------------------------

enum class FactorModel { CAPM, FFC, FF5 };

std::vector<std::string> model_factors(FactorModel model);
std::string model_name(FactorModel model);
FactorModel parse_model(std::string_view name);

// Regression of the series on [1, model factors] over the series months.
// Coefficient 0 is alpha. Months missing from the factor panel are an error.
RegressionFit ts_alpha(const portfolio::PortfolioSeries& series, const FactorPanel& factors, FactorModel model,
                       const OlsOptions& opts = {});

// ---- Fama-MacBeth ----------------------------------------------------------

// Betas on `factor_names` for one asset, dated by the last month of each
// window of `window` consecutive observations.
using BetaPath = std::map<YearMonth, Eigen::VectorXd>;

BetaPath rolling_betas(const std::map<YearMonth, double>& asset_returns, const FactorPanel& factors,
                       const std::vector<std::string>& factor_names, int window = 24);

struct CrossSection {
    // One row per portfolio. Column 0 of `exposures` is not an intercept;
    // fm_second_pass adds one.
    YearMonth month;
    Eigen::VectorXd returns;
    Eigen::MatrixXd exposures;
};

struct PremiumEstimate {
    std::string name;
    double mean = 0.0;
    double std_error = 0.0;
    double t_stat = 0.0;
};

struct SecondPassResult {
    std::vector<std::string> names;           // "const" followed by exposure names
    std::vector<YearMonth> months;            // months used
    Eigen::MatrixXd gammas;                   // months x names
    std::vector<PremiumEstimate> premia;
    double mean_r_squared_adj = 0.0;
    double mape = 0.0;                        // mean |time-average pricing error| across portfolios
    std::vector<YearMonth> collinear_months;  // excluded, condition number above the limit
};

inline constexpr double kCrossSectionMaxCondition = 1e8;

SecondPassResult fm_second_pass(std::span<const CrossSection> sections, const std::vector<std::string>& exposure_names,
                                double max_condition = kCrossSectionMaxCondition);

struct FmModel {
    std::string name;
    std::vector<std::string> factors;  // beta exposures
    bool cyber = false;                // include the aggregated score exposure
};

// M.1 Mkt, M.2 Cyber, M.3 Mkt+Cyber, M.4 FFC+Cyber, M.5 FF5+Cyber.
std::vector<FmModel> default_fm_models();

struct FmInputs {
    const ReturnsPanel* returns = nullptr;
    const FactorPanel* factors = nullptr;
    const portfolio::SortResult* portfolios = nullptr;  // typically 20 score bins
    int window = 24;
};

// Builds the month-t cross sections from holdings that earn R_{p,t}, betas
// estimated through t-1 and the formation scores of those holdings, then runs
// the second pass.
SecondPassResult fama_macbeth(const FmInputs& in, const FmModel& model);

// ---- GRS -------------------------------------------------------------------

struct GRSResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t N = 0, T = 0, K = 0;
    double mean_r_squared = 0.0;  // mean adjusted R^2 of the N regressions
    Eigen::VectorXd alphas;
};

// returns: T x N portfolio excess returns; factors: T x K.
GRSResult grs_test(const Eigen::MatrixXd& returns, const Eigen::MatrixXd& factors);

// ---- Bayesian subset scan --------------------------------------------------

enum class KMode { Original, AsPrinted };
KMode parse_kmode(std::string_view name);
std::string kmode_name(KMode mode);

inline constexpr double kDefaultPrior = 1.25;

// Log marginal likelihood of a factor subset. `market` is T x 1, `included`
// T x K_f, `excluded` T x K_e (either may have zero columns). The third,
// subset-independent block is omitted.
double bs_log_marginal_likelihood(const Eigen::MatrixXd& market, const Eigen::MatrixXd& included,
                                  const Eigen::MatrixXd& excluded, double prior = kDefaultPrior,
                                  KMode mode = KMode::Original);

// Building blocks, exposed for checking against hand formulas.
double log_ml_unrestricted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X, double prior, KMode mode);
double log_ml_restricted(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X);

// Softmax of log marginal likelihoods under equal priors.
std::vector<double> posterior_probabilities(std::span<const double> log_ml);

struct PosteriorSnapshot {
    YearMonth end_month;
    std::vector<double> probabilities;  // one per subset mask
    std::vector<double> cumulative;     // one per candidate: sum over subsets containing it
};

struct ModelPosterior {
    std::vector<std::string> candidates;  // non-market factors
    std::vector<unsigned> subsets;        // bit masks over candidates, ascending
    std::vector<PosteriorSnapshot> path;  // single entry unless expanding
};

std::string subset_label(unsigned mask, const std::vector<std::string>& candidates);

struct BsOptions {
    double prior = kDefaultPrior;
    KMode kmode = KMode::Original;
    bool expanding = false;
    int min_window = 36;  // first expanding-window length
};

// `market` names the always-included factor; candidates are the others.
ModelPosterior bs_posteriors(const FactorPanel& factors, const std::string& market,
                             const std::vector<std::string>& candidates, const BsOptions& options = {});

// ---- fixed-effects determinants -------------------------------------------

enum class FixedEffects { FirmYear, IndustryYear };

struct PanelRow {
    std::string firm;
    std::string industry;
    int year = 0;
    double y = 0.0;
    std::vector<double> x;
};

struct FeResult {
    std::vector<std::string> names;  // retained regressors
    Eigen::VectorXd coefficients;
    Eigen::VectorXd clustered_se;
    Eigen::VectorXd unclustered_se;
    Eigen::VectorXd t_stats;  // from clustered errors
    double r_squared_within = 0.0;
    std::size_t n_obs = 0;
    std::size_t n_clusters = 0;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;
};

FeResult fe_determinants(std::span<const PanelRow> rows, const std::vector<std::string>& names, FixedEffects fe);

}  // namespace cyber::pricing
