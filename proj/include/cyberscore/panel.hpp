// In-memory panels shared by the scoring, portfolio and pricing stages.
// Panels reject duplicate keys on insertion and are immutable once built.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cyberscore/dates.hpp"

namespace cyber {

inline constexpr const char* kOverallKind = "overall";
inline constexpr const char* kSentimentKind = "sentiment";

struct ScoreRow {
    std::string firm_id;
    Date filing_date;
    std::string kind;
    double value = 0.0;
};

class ScorePanel {
public:
    // Throws std::invalid_argument("duplicate filing ...") when the
    // (firm, date, kind) key already exists.
    void add(ScoreRow row);

    const std::vector<ScoreRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    std::vector<std::string> kinds() const;
    std::vector<std::string> firms() const;

    // Most recent (date, value) of `kind` for `firm` dated strictly before `cutoff`.
    std::optional<std::pair<Date, double>> latest_before(const std::string& firm, const std::string& kind,
                                                         Date cutoff) const;

private:
    std::vector<ScoreRow> rows_;
    // (kind, firm) -> date -> value
    std::map<std::pair<std::string, std::string>, std::map<Date, double>> by_kind_firm_;
};

struct ReturnObservation {
    std::string asset_id;
    YearMonth month;
    double excess_return = 0.0;
    double market_cap = std::numeric_limits<double>::quiet_NaN();  // NaN when unknown
    std::map<std::string, double> characteristics;

    bool has_cap() const { return std::isfinite(market_cap) && market_cap > 0.0; }
};

class ReturnsPanel {
public:
    // Throws on a duplicate (asset, month) or a nonpositive market cap.
    void add(ReturnObservation obs);

    const std::vector<ReturnObservation>& rows() const { return rows_; }
    const ReturnObservation* find(const std::string& asset, YearMonth month) const;
    std::vector<YearMonth> months() const;
    std::vector<std::string> assets() const;
    // Observations of one month, ordered by asset id.
    std::vector<const ReturnObservation*> in_month(YearMonth month) const;

private:
    std::vector<ReturnObservation> rows_;
    std::map<std::pair<std::string, int>, std::size_t> index_;
    std::map<int, std::map<std::string, std::size_t>> by_month_;
};

struct FactorPanel {
    std::vector<YearMonth> months;   // consecutive
    std::vector<std::string> names;  // column names, e.g. mkt, smb, hml, umd, rmw, cma
    Eigen::MatrixXd values;          // months x names
    std::vector<double> rf;          // optional risk-free rate per month

    std::optional<std::size_t> index_of(const std::string& name) const;
    Eigen::VectorXd column(const std::string& name) const;  // throws if missing
    std::optional<std::size_t> row_of(YearMonth m) const;
    // Keeps the named columns in the given order.
    FactorPanel select(const std::vector<std::string>& cols) const;
    // Throws when months are not consecutive or the shape is inconsistent.
    void validate() const;
    // Appends (or replaces) a column defined on a subset of months; rows
    // outside `series` are dropped.
    FactorPanel with_column(const std::string& name, const std::map<YearMonth, double>& series) const;
};

// Daily returns keyed by asset then date.
struct DailyReturns {
    std::map<std::string, std::map<Date, double>> series;

    void add(const std::string& asset, Date d, double r);
};

}  // namespace cyber
