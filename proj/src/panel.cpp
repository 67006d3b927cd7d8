#include "cyberscore/panel.hpp"

#include <set>
#include <stdexcept>

namespace cyber {

void ScorePanel::add(ScoreRow row) {
    auto& series = by_kind_firm_[{row.kind, row.firm_id}];
    if (series.contains(row.filing_date))
        throw std::invalid_argument("duplicate filing: " + row.firm_id + " " + row.filing_date.iso() + " " + row.kind);
    series.emplace(row.filing_date, row.value);
    rows_.push_back(std::move(row));
}

std::vector<std::string> ScorePanel::kinds() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : rows_)
        if (seen.insert(r.kind).second) out.push_back(r.kind);
    return out;
}

std::vector<std::string> ScorePanel::firms() const {
    std::set<std::string> seen;
    for (const auto& r : rows_) seen.insert(r.firm_id);
    return {seen.begin(), seen.end()};
}

std::optional<std::pair<Date, double>> ScorePanel::latest_before(const std::string& firm, const std::string& kind,
                                                                 Date cutoff) const {
    auto it = by_kind_firm_.find({kind, firm});
    if (it == by_kind_firm_.end()) return std::nullopt;
    const auto& series = it->second;
    auto pos = series.lower_bound(cutoff);
    if (pos == series.begin()) return std::nullopt;
    --pos;
    return std::make_pair(pos->first, pos->second);
}

void ReturnsPanel::add(ReturnObservation obs) {
    if (std::isfinite(obs.market_cap) && obs.market_cap <= 0.0)
        throw std::invalid_argument("nonpositive market cap for " + obs.asset_id + " " + obs.month.iso());
    auto key = std::make_pair(obs.asset_id, obs.month.index());
    if (index_.contains(key)) throw std::invalid_argument("duplicate return row: " + obs.asset_id + " " + obs.month.iso());
    index_.emplace(key, rows_.size());
    by_month_[obs.month.index()].emplace(obs.asset_id, rows_.size());
    rows_.push_back(std::move(obs));
}

const ReturnObservation* ReturnsPanel::find(const std::string& asset, YearMonth month) const {
    auto it = index_.find({asset, month.index()});
    return it == index_.end() ? nullptr : &rows_[it->second];
}

std::vector<YearMonth> ReturnsPanel::months() const {
    std::vector<YearMonth> out;
    for (const auto& [idx, _] : by_month_) out.push_back(YearMonth::from_index(idx));
    return out;
}

std::vector<std::string> ReturnsPanel::assets() const {
    std::set<std::string> seen;
    for (const auto& r : rows_) seen.insert(r.asset_id);
    return {seen.begin(), seen.end()};
}

std::vector<const ReturnObservation*> ReturnsPanel::in_month(YearMonth month) const {
    std::vector<const ReturnObservation*> out;
    auto it = by_month_.find(month.index());
    if (it == by_month_.end()) return out;
    for (const auto& [asset, idx] : it->second) out.push_back(&rows_[idx]);
    return out;
}

std::optional<std::size_t> FactorPanel::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

Eigen::VectorXd FactorPanel::column(const std::string& name) const {
    auto idx = index_of(name);
    if (!idx) throw std::invalid_argument("unknown factor '" + name + "'");
    return values.col(static_cast<Eigen::Index>(*idx));
}

std::optional<std::size_t> FactorPanel::row_of(YearMonth m) const {
    if (months.empty()) return std::nullopt;
    int offset = m.index() - months.front().index();
    if (offset < 0 || offset >= static_cast<int>(months.size())) return std::nullopt;
    return static_cast<std::size_t>(offset);
}

FactorPanel FactorPanel::select(const std::vector<std::string>& cols) const {
    FactorPanel out;
    out.months = months;
    out.rf = rf;
    out.names = cols;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.values.col(static_cast<Eigen::Index>(j)) = column(cols[j]);
    return out;
}

void FactorPanel::validate() const {
    if (values.rows() != static_cast<Eigen::Index>(months.size()) ||
        values.cols() != static_cast<Eigen::Index>(names.size()))
        throw std::invalid_argument("factor panel shape mismatch");
    if (!rf.empty() && rf.size() != months.size()) throw std::invalid_argument("factor panel rf length mismatch");
    for (std::size_t i = 1; i < months.size(); ++i)
        if (months[i].index() != months[i - 1].index() + 1)
            throw std::invalid_argument("factor panel has a gap after " + months[i - 1].iso());
}

FactorPanel FactorPanel::with_column(const std::string& name, const std::map<YearMonth, double>& series) const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < months.size(); ++i)
        if (series.contains(months[i])) keep.push_back(i);
    FactorPanel out;
    out.names = names;
    auto existing = index_of(name);
    if (!existing) out.names.push_back(name);
    out.values.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(out.names.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        auto src = static_cast<Eigen::Index>(keep[r]);
        out.months.push_back(months[keep[r]]);
        if (!rf.empty()) out.rf.push_back(rf[keep[r]]);
        for (Eigen::Index c = 0; c < values.cols(); ++c) out.values(static_cast<Eigen::Index>(r), c) = values(src, c);
        auto col = static_cast<Eigen::Index>(existing ? *existing : names.size());
        out.values(static_cast<Eigen::Index>(r), col) = series.at(months[keep[r]]);
    }
    return out;
}

void DailyReturns::add(const std::string& asset, Date d, double r) {
    auto& s = series[asset];
    if (s.contains(d)) throw std::invalid_argument("duplicate daily return: " + asset + " " + d.iso());
    s.emplace(d, r);
}

}  // namespace cyber
