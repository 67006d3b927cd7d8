#include "cyberscore/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cyberscore/stats.hpp"

namespace cyber::portfolio {

std::vector<int> rank_bins(std::span<const double> values, std::span<const std::string> keys, int n_bins) {
    if (n_bins < 2) throw std::invalid_argument("n_bins must be >= 2");
    if (values.size() != keys.size()) throw std::invalid_argument("values and keys differ in length");
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return keys[a] < keys[b];
    });
    std::vector<int> bins(n, 0);
    std::size_t r = 0;
    while (r < n) {
        std::size_t run_end = r + 1;
        while (run_end < n && values[order[run_end]] == values[order[r]]) ++run_end;
        int bin = static_cast<int>(r * static_cast<std::size_t>(n_bins) / n);
        for (std::size_t j = r; j < run_end; ++j) bins[order[j]] = bin;
        r = run_end;
    }
    return bins;
}

namespace {

struct Candidate {
    std::string asset_id;
    Date score_date;
    double score = 0.0;
    double cap = 0.0;
    const ReturnObservation* prior = nullptr;  // quarter-end observation
};

std::vector<Candidate> eligible(const ReturnsPanel& returns, const ScorePanel& scores, const std::string& kind,
                                YearMonth quarter) {
    const Date cutoff = Date::first_of(quarter);
    std::vector<Candidate> out;
    for (const auto* obs : returns.in_month(quarter.plus(-1))) {
        if (!obs->has_cap()) continue;
        auto s = scores.latest_before(obs->asset_id, kind, cutoff);
        if (!s) continue;
        out.push_back({obs->asset_id, s->first, s->second, obs->market_cap, obs});
    }
    return out;
}

struct Holding {
    std::string asset_id;
    double cap = 0.0;
};

std::pair<YearMonth, YearMonth> month_range(const ReturnsPanel& returns, const SortOptions& options) {
    auto months = returns.months();
    if (months.empty()) throw std::invalid_argument("empty returns panel");
    YearMonth first = options.first_month.value_or(months.front());
    YearMonth last = options.last_month.value_or(months.back());
    if (last < first) throw std::invalid_argument("last month precedes first month");
    return {first, last};
}

// Walks months, reforming at quarter starts through `form`, which returns
// the holdings per cell. Quarters with no eligible firm are skipped.
template <typename Form>
std::vector<PortfolioSeries> build_series(const ReturnsPanel& returns, const SortOptions& options,
                                          std::size_t n_cells, Form&& form, std::vector<std::string>& warnings) {
    auto [first, last] = month_range(returns, options);
    std::vector<PortfolioSeries> series(n_cells);
    std::vector<std::vector<Holding>> holdings;
    bool active = false;
    for (YearMonth m = first; m <= last; m = m.plus(1)) {
        if (m == first || m.is_quarter_start()) {
            YearMonth q = m.quarter_start();
            holdings = form(q);
            active = !holdings.empty();
            if (!active) warnings.push_back("no eligible firms for quarter starting " + q.iso() + "; skipped");
        }
        if (!active) continue;
        for (std::size_t c = 0; c < n_cells; ++c) {
            double total = 0.0, acc = 0.0;
            std::map<std::string, double> w;
            for (const auto& h : holdings[c]) {
                const auto* obs = returns.find(h.asset_id, m);
                if (!obs) continue;  // delisted or missing this month
                double cap = h.cap;
                if (options.weighting == Weighting::MonthlyCap) {
                    const auto* prev = returns.find(h.asset_id, m.plus(-1));
                    if (prev && prev->has_cap()) cap = prev->market_cap;
                }
                w[h.asset_id] = cap;
                total += cap;
                acc += cap * obs->excess_return;
            }
            if (w.empty() || total <= 0.0)
                throw std::runtime_error("degenerate sort: empty portfolio " + std::to_string(c + 1) + " in " +
                                         m.iso());
            for (auto& [_, v] : w) v /= total;
            series[c].months.push_back(m);
            series[c].returns.push_back(acc / total);
            series[c].weights.push_back(std::move(w));
            series[c].cap_totals.push_back(total);
        }
    }
    return series;
}

std::vector<int> bins_of(const std::vector<Candidate>& c, int n_bins, bool by_score, const std::string& characteristic) {
    std::vector<double> values;
    std::vector<std::string> keys;
    for (const auto& x : c) {
        if (by_score) {
            values.push_back(x.score);
        } else {
            auto it = x.prior->characteristics.find(characteristic);
            if (it == x.prior->characteristics.end() || !std::isfinite(it->second))
                throw std::runtime_error("missing characteristic '" + characteristic + "' for " + x.asset_id + " in " +
                                         x.prior->month.iso());
            values.push_back(it->second);
        }
        keys.push_back(x.asset_id);
    }
    return rank_bins(values, keys, n_bins);
}

}  // namespace

SortResult quantile_sort(const ReturnsPanel& returns, const ScorePanel& scores, const SortOptions& options) {
    if (options.n_bins < 2) throw std::invalid_argument("n_bins must be >= 2");
    SortResult result;
    const auto n = static_cast<std::size_t>(options.n_bins);
    auto form = [&](YearMonth q) {
        std::vector<std::vector<Holding>> cells;
        auto cands = eligible(returns, scores, options.score_kind, q);
        if (cands.empty()) return cells;
        cells.resize(n);
        auto bins = bins_of(cands, options.n_bins, true, {});
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const auto& c = cands[i];
            cells[static_cast<std::size_t>(bins[i])].push_back({c.asset_id, c.cap});
            result.formations.push_back({q, c.asset_id, bins[i], c.score_date, c.score, c.cap});
        }
        return cells;
    };
    result.bins = build_series(returns, options, n, form, result.warnings);
    for (std::size_t b = 0; b < n; ++b) result.bins[b].name = "P" + std::to_string(b + 1);
    return result;
}

PortfolioSeries long_short(const PortfolioSeries& top, const PortfolioSeries& bottom) {
    if (top.months != bottom.months) throw std::invalid_argument("misaligned months in long-short");
    PortfolioSeries out;
    out.name = top.name + "-" + bottom.name;
    out.months = top.months;
    out.returns.resize(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) out.returns[i] = top.returns[i] - bottom.returns[i];
    return out;
}

double sharpe(const PortfolioSeries& series) {
    if (series.size() < 12) throw std::invalid_argument("sharpe ratio needs at least 12 months");
    const auto& r = series.returns;
    const bool constant = std::all_of(r.begin(), r.end(), [&](double x) { return x == r.front(); });
    double sd = stats::stddev(r);
    if (constant || !(sd > 0.0)) throw std::invalid_argument("sharpe ratio undefined: zero volatility");
    return stats::mean(series.returns) * 12.0 / (sd * std::sqrt(12.0));
}

SeriesSummary summarize(const PortfolioSeries& series) {
    SeriesSummary s;
    s.n = series.size();
    if (s.n == 0) return s;
    s.mean = stats::mean(series.returns);
    if (s.n >= 2) {
        s.stddev = stats::stddev(series.returns);
        if (s.stddev > 0.0) s.t_stat = s.mean / (s.stddev / std::sqrt(static_cast<double>(s.n)));
    }
    s.sharpe = std::nan("");
    if (s.n >= 12 && s.stddev > 0.0) {
        try {
            s.sharpe = sharpe(series);
        } catch (const std::invalid_argument&) {
            // constant series
        }
    }
    return s;
}

bool is_non_decreasing(std::span<const double> means, double tolerance) {
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] < means[i - 1] - tolerance) return false;
    return true;
}

DoubleSortResult double_sort(const ReturnsPanel& returns, const ScorePanel& scores, const std::string& characteristic,
                             int n_outer, int n_inner, const SortOptions& options) {
    if (n_outer < 2 || n_inner < 2) throw std::invalid_argument("double sort needs at least 2 bins per dimension");
    DoubleSortResult r;
    r.characteristic = characteristic;
    r.n_outer = n_outer;
    r.n_inner = n_inner;
    const auto cells_n = static_cast<std::size_t>(n_outer * n_inner);
    auto form = [&](YearMonth q) {
        std::vector<std::vector<Holding>> cells;
        auto cands = eligible(returns, scores, options.score_kind, q);
        if (cands.empty()) return cells;
        cells.resize(cells_n);
        auto outer = bins_of(cands, n_outer, false, characteristic);
        for (int o = 0; o < n_outer; ++o) {
            std::vector<Candidate> group;
            for (std::size_t i = 0; i < cands.size(); ++i)
                if (outer[i] == o) group.push_back(cands[i]);
            if (group.empty()) throw std::runtime_error("degenerate sort: empty outer bin in quarter " + q.iso());
            auto inner = bins_of(group, n_inner, true, {});
            for (std::size_t i = 0; i < group.size(); ++i)
                cells[static_cast<std::size_t>(o * n_inner + inner[i])].push_back({group[i].asset_id, group[i].cap});
        }
        return cells;
    };
    auto flat = build_series(returns, options, cells_n, form, r.warnings);
    r.cells.assign(static_cast<std::size_t>(n_outer), {});
    r.mean_returns.assign(static_cast<std::size_t>(n_outer), {});
    for (int o = 0; o < n_outer; ++o) {
        for (int i = 0; i < n_inner; ++i) {
            auto s = std::move(flat[static_cast<std::size_t>(o * n_inner + i)]);
            s.name = "Q" + std::to_string(o + 1) + "P" + std::to_string(i + 1);
            if (s.returns.empty()) throw std::runtime_error("degenerate sort: no months for cell " + s.name);
            r.mean_returns[static_cast<std::size_t>(o)].push_back(stats::mean(s.returns));
            r.cells[static_cast<std::size_t>(o)].push_back(std::move(s));
        }
        r.flagged.push_back(!is_non_decreasing(r.mean_returns[static_cast<std::size_t>(o)]));
    }
    return r;
}

}  // namespace cyber::portfolio
