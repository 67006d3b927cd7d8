// Per-filing cyber scores. Each filing paragraph is matched to its most
// similar knowledgebase paragraph; a score is the mean of the largest
// `trim` share of those maxima. Sub-scores restrict the knowledgebase to one
// tactic or super-tactic; the sentiment score zeroes paragraphs that carry no
// risk vocabulary.
#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cyberscore/embed.hpp"
#include "cyberscore/panel.hpp"
#include "cyberscore/textprep.hpp"

namespace cyber::score {

using RiskDictionary = textprep::WordSet;

inline constexpr double kDefaultTrim = 0.99;

// Risk/uncertainty word list used for sentiment gating.
const RiskDictionary& default_risk_dictionary();

// Row-normalized copy; throws "undefined angle" on a zero row.
Eigen::MatrixXd unit_rows(std::span<const embed::EmbeddingVector> vectors);

// For each filing paragraph, the maximum cosine against the kb rows. Both
// inputs must already be unit rows.
std::vector<double> paragraph_maxima(const Eigen::MatrixXd& filing_unit, const Eigen::MatrixXd& kb_unit);
std::vector<double> paragraph_maxima(std::span<const embed::EmbeddingVector> filing,
                                     std::span<const embed::EmbeddingVector> kb_subset);

// Mean of the ceil(trim * n) largest maxima.
double cyber_score(std::span<const double> maxima, double trim = kDefaultTrim);

// paragraph_maxima with paragraphs lacking any dictionary word set to 0.
std::vector<double> sentiment_maxima(std::span<const std::vector<std::string>> paragraph_tokens,
                                     const Eigen::MatrixXd& filing_unit, const Eigen::MatrixXd& kb_unit,
                                     const RiskDictionary& dict);

struct KnowledgebaseVectors {
    Eigen::MatrixXd unit;              // one unit row per kb paragraph
    std::vector<std::string> tactics;  // tactic per row
};

struct FilingInput {
    std::string firm_id;
    Date filing_date;
    std::vector<std::vector<std::string>> paragraph_tokens;
    Eigen::MatrixXd unit;  // one unit row per paragraph
};

// Overall, per-tactic, per-super-tactic and sentiment rows for one filing.
// `super_tactic_of` maps every kb tactic to its super-tactic name.
std::vector<ScoreRow> score_filing(const FilingInput& filing, const KnowledgebaseVectors& kb,
                                   const std::map<std::string, std::string>& super_tactic_of,
                                   const RiskDictionary& dict, double trim = kDefaultTrim);

struct YearlyRow {
    int year = 0;
    std::string kind;
    std::size_t n = 0;
    double mean = 0.0;
    std::vector<double> percentiles;
};

std::vector<YearlyRow> aggregate_yearly(const ScorePanel& panel,
                                        const std::vector<double>& percentiles = {5, 25, 50, 75, 95});

// sqrt(var(r) - cov(r, m)^2 / var(m)).
double idiosyncratic_volatility(std::span<const double> asset, std::span<const double> market);

struct IdiosyncraticRow {
    std::string kind;
    std::size_t n = 0;
    double covariance = 0.0;
    double correlation = 0.0;
    bool degenerate = false;  // a side had zero variance; correlation forced to 0
};

struct IdiosyncraticResult {
    std::vector<IdiosyncraticRow> rows;
    std::vector<std::string> warnings;  // skipped firm-dates and degenerate kinds
};

// Each score is paired with the idiosyncratic volatility of its firm over
// the `window` months preceding the filing month.
IdiosyncraticResult idiosyncratic_stats(const ScorePanel& panel, const ReturnsPanel& returns,
                                        const std::map<YearMonth, double>& market, int window = 60);

}  // namespace cyber::score
