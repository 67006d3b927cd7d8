// Quarterly-rebalanced, value-weighted portfolios sorted on scores.
//
// At each quarter start a firm is eligible when it has a score dated
// strictly before that day and a market cap for the month closing the
// previous quarter. Eligible firms are ranked and cut into bins; membership
// then stays fixed for the three months of the quarter.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyberscore/panel.hpp"

namespace cyber::portfolio {

enum class Weighting {
    QuarterEndCap,  // caps from the month closing the previous quarter
    MonthlyCap,     // caps from the previous month (sensitivity only)
};

struct PortfolioSeries {
    std::string name;
    std::vector<YearMonth> months;
    std::vector<double> returns;
    // Realized weights per month, summing to 1 over firms with a return.
    std::vector<std::map<std::string, double>> weights;
    // Sum of the weighting caps of the firms that contributed that month.
    std::vector<double> cap_totals;

    std::size_t size() const { return returns.size(); }
};

struct Formation {
    YearMonth quarter;
    std::string asset_id;
    int bin = 0;  // 0-based
    Date score_date;
    double score = 0.0;
    double cap = 0.0;
};

struct SortOptions {
    int n_bins = 5;
    std::string score_kind = kOverallKind;
    Weighting weighting = Weighting::QuarterEndCap;
    std::optional<YearMonth> first_month;
    std::optional<YearMonth> last_month;
};

struct SortResult {
    std::vector<PortfolioSeries> bins;  // bins[0] is the lowest-score portfolio
    std::vector<Formation> formations;
    std::vector<std::string> warnings;
};

// Rank-based bin index for each value: stable order by (value, key), bin =
// floor(rank * n_bins / n). Equal values share the lowest bin of their run.
std::vector<int> rank_bins(std::span<const double> values, std::span<const std::string> keys, int n_bins);

SortResult quantile_sort(const ReturnsPanel& returns, const ScorePanel& scores, const SortOptions& options);

PortfolioSeries long_short(const PortfolioSeries& top, const PortfolioSeries& bottom);

// Annualized: mean * 12 / (sample std * sqrt(12)).
double sharpe(const PortfolioSeries& series);

struct SeriesSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double t_stat = 0.0;
    double sharpe = 0.0;
};

SeriesSummary summarize(const PortfolioSeries& series);

struct DoubleSortResult {
    std::string characteristic;
    int n_outer = 0;
    int n_inner = 0;
    // cells[o][i]: outer bin o on the characteristic, inner bin i on the score.
    std::vector<std::vector<PortfolioSeries>> cells;
    std::vector<std::vector<double>> mean_returns;
    // Row flagged when some inner step falls by more than the tolerance.
    std::vector<bool> flagged;
    std::vector<std::string> warnings;
};

inline constexpr double kMonotonicityTolerance = 0.0003;  // 0.03 percentage points

bool is_non_decreasing(std::span<const double> means, double tolerance = kMonotonicityTolerance);

DoubleSortResult double_sort(const ReturnsPanel& returns, const ScorePanel& scores, const std::string& characteristic,
                             int n_outer, int n_inner, const SortOptions& options);

}  // namespace cyber::portfolio
