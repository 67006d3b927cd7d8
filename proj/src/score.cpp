#include "cyberscore/score.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "cyberscore/stats.hpp"

namespace cyber::score {

const RiskDictionary& default_risk_dictionary() {
    static const RiskDictionary words = {
        "risk", "jeopardize", "riskiness", "risks", "unsettled", "treacherous", "uncertainty", "unpredictability",
        "oscillating", "variable", "dilemma", "perilous", "chance", "skepticism", "tentativeness", "possibility",
        "hesitancy", "unreliability", "pending", "riskier", "wariness", "uncertainties", "unresolved", "vagueness",
        "uncertain", "unsure", "dodgy", "doubt", "irregular", "equivocation", "prospect", "jeopardy", "indecisive",
        "bet", "suspicion", "chancy", "variability", "risking", "menace", "exposed", "peril", "qualm", "likelihood",
        "hesitating", "vacillating", "threat", "risked", "gnarly", "probability", "unreliable", "disquiet",
        "unknown", "unsafe", "ambivalence", "varying", "hazy", "imperil", "unclear", "apprehension", "vacillation",
        "unpredictable", "unforeseeable", "incalculable", "speculative", "halting", "untrustworthy", "fear", "wager",
        "equivocating", "reservation", "torn", "diffident", "hesitant", "precarious", "fickleness", "gamble",
        "undetermined", "misgiving", "risky", "insecurity", "changeability", "instability", "debatable",
        "undependable", "doubtful", "undecided", "incertitude", "hazard", "dicey", "fitful", "tricky", "indecision",
        "parlous", "sticky", "wavering", "unconfident", "dangerous", "iffy", "defenseless", "tentative", "faltering",
        "unsureness", "hazardous", "endanger", "fluctuant", "queries", "quandary", "niggle", "danger", "insecure",
        "diffidence", "fluctuating", "changeable", "precariousness", "unstable", "riskiest", "doubtfulness", "vague",
        "hairy", "erratic", "ambivalent", "query", "dubious"};
    return words;
}

Eigen::MatrixXd unit_rows(std::span<const embed::EmbeddingVector> vectors) {
    if (vectors.empty()) return {};
    const auto d = static_cast<Eigen::Index>(vectors.front().dim());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(vectors.size()), d);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i].values;
        if (static_cast<Eigen::Index>(v.size()) != d) throw std::invalid_argument("ragged dimensions");
        auto row = x.row(static_cast<Eigen::Index>(i));
        row = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
        double norm = row.norm();
        if (norm == 0.0) throw std::invalid_argument("undefined angle: zero vector " + vectors[i].ref.doc_id);
        row /= norm;
    }
    return x;
}

std::vector<double> paragraph_maxima(const Eigen::MatrixXd& filing_unit, const Eigen::MatrixXd& kb_unit) {
    if (kb_unit.rows() == 0) throw std::invalid_argument("empty knowledgebase subset");
    if (filing_unit.rows() == 0) throw std::invalid_argument("filing has no paragraphs");
    if (filing_unit.cols() != kb_unit.cols()) throw std::invalid_argument("dimension mismatch");
    Eigen::MatrixXd sims = filing_unit * kb_unit.transpose();
    std::vector<double> out(static_cast<std::size_t>(sims.rows()));
    for (Eigen::Index i = 0; i < sims.rows(); ++i)
        out[static_cast<std::size_t>(i)] = std::clamp(sims.row(i).maxCoeff(), -1.0, 1.0);
    return out;
}

std::vector<double> paragraph_maxima(std::span<const embed::EmbeddingVector> filing,
                                     std::span<const embed::EmbeddingVector> kb_subset) {
    if (kb_subset.empty()) throw std::invalid_argument("empty knowledgebase subset");
    if (filing.empty()) throw std::invalid_argument("filing has no paragraphs");
    return paragraph_maxima(unit_rows(filing), unit_rows(kb_subset));
}

double cyber_score(std::span<const double> maxima, double trim) {
    if (maxima.empty()) throw std::invalid_argument("no paragraph maxima to score");
    if (!(trim > 0.0 && trim <= 1.0)) throw std::invalid_argument("trim must lie in (0, 1]");
    std::vector<double> sorted(maxima.begin(), maxima.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // The small slack keeps e.g. 0.99 * 100 from rounding up to 100.
    auto keep = static_cast<std::size_t>(std::ceil(trim * static_cast<double>(sorted.size()) - 1e-9));
    keep = std::clamp<std::size_t>(keep, 1, sorted.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < keep; ++i) sum += sorted[i];
    return sum / static_cast<double>(keep);
}

std::vector<double> sentiment_maxima(std::span<const std::vector<std::string>> paragraph_tokens,
                                     const Eigen::MatrixXd& filing_unit, const Eigen::MatrixXd& kb_unit,
                                     const RiskDictionary& dict) {
    if (dict.empty()) throw std::invalid_argument("empty risk dictionary");
    if (static_cast<Eigen::Index>(paragraph_tokens.size()) != filing_unit.rows())
        throw std::invalid_argument("paragraph tokens and vectors differ in count");
    auto maxima = paragraph_maxima(filing_unit, kb_unit);
    for (std::size_t i = 0; i < maxima.size(); ++i) {
        const auto& tokens = paragraph_tokens[i];
        bool hit = std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return dict.contains(t); });
        if (!hit) maxima[i] = 0.0;
    }
    return maxima;
}

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

}  // namespace

std::vector<ScoreRow> score_filing(const FilingInput& filing, const KnowledgebaseVectors& kb,
                                   const std::map<std::string, std::string>& super_tactic_of,
                                   const RiskDictionary& dict, double trim) {
    if (static_cast<Eigen::Index>(kb.tactics.size()) != kb.unit.rows())
        throw std::invalid_argument("knowledgebase tactics and vectors differ in count");
    std::map<std::string, std::vector<Eigen::Index>> by_tactic, by_super;
    for (std::size_t i = 0; i < kb.tactics.size(); ++i) {
        const auto& t = kb.tactics[i];
        auto it = super_tactic_of.find(t);
        if (it == super_tactic_of.end()) throw std::invalid_argument("assignment does not cover tactic '" + t + "'");
        by_tactic[t].push_back(static_cast<Eigen::Index>(i));
        by_super[it->second].push_back(static_cast<Eigen::Index>(i));
    }

    std::vector<ScoreRow> rows;
    auto emit = [&](const std::string& kind, double value) {
        rows.push_back({filing.firm_id, filing.filing_date, kind, value});
    };
    // All sub-scores come from one similarity block against the full kb.
    Eigen::MatrixXd sims = filing.unit * kb.unit.transpose();
    auto maxima_over = [&](const std::vector<Eigen::Index>* subset) {
        std::vector<double> out(static_cast<std::size_t>(sims.rows()));
        for (Eigen::Index r = 0; r < sims.rows(); ++r) {
            double best = -1.0;
            if (subset) {
                for (auto c : *subset) best = std::max(best, sims(r, c));
            } else {
                best = sims.row(r).maxCoeff();
            }
            out[static_cast<std::size_t>(r)] = std::clamp(best, -1.0, 1.0);
        }
        return out;
    };
    if (sims.rows() == 0) throw std::invalid_argument("filing has no paragraphs");

    auto overall = maxima_over(nullptr);
    emit(kOverallKind, cyber_score(overall, trim));
    for (const auto& [tactic, idx] : by_tactic) emit(tactic, cyber_score(maxima_over(&idx), trim));
    for (const auto& [name, idx] : by_super) emit(name, cyber_score(maxima_over(&idx), trim));

    if (dict.empty()) throw std::invalid_argument("empty risk dictionary");
    if (filing.paragraph_tokens.size() != overall.size())
        throw std::invalid_argument("paragraph tokens and vectors differ in count");
    auto gated = overall;
    for (std::size_t i = 0; i < gated.size(); ++i) {
        const auto& tokens = filing.paragraph_tokens[i];
        if (std::none_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return dict.contains(t); }))
            gated[i] = 0.0;
    }
    emit(kSentimentKind, cyber_score(gated, trim));
    return rows;
}

std::vector<YearlyRow> aggregate_yearly(const ScorePanel& panel, const std::vector<double>& percentiles) {
    if (panel.empty()) throw std::invalid_argument("empty score panel");
    std::map<std::pair<int, std::string>, std::vector<double>> groups;
    for (const auto& r : panel.rows()) groups[{r.filing_date.year, r.kind}].push_back(r.value);
    std::vector<YearlyRow> out;
    for (const auto& [key, values] : groups) {
        YearlyRow row;
        row.year = key.first;
        row.kind = key.second;
        row.n = values.size();
        row.mean = stats::mean(values);
        for (double q : percentiles) row.percentiles.push_back(stats::percentile(values, q));
        out.push_back(std::move(row));
    }
    return out;
}

double idiosyncratic_volatility(std::span<const double> asset, std::span<const double> market) {
    double vm = stats::variance(market);
    if (vm <= 0.0) throw std::invalid_argument("market variance is zero");
    double c = stats::covariance(asset, market);
    double v = stats::variance(asset) - c * c / vm;
    return std::sqrt(std::max(0.0, v));
}

IdiosyncraticResult idiosyncratic_stats(const ScorePanel& panel, const ReturnsPanel& returns,
                                        const std::map<YearMonth, double>& market, int window) {
    if (window < 3) throw std::invalid_argument("window must be >= 3 months");
    IdiosyncraticResult result;
    // Volatility depends only on (firm, filing month); compute once per key.
    std::map<std::pair<std::string, int>, std::optional<double>> vol_cache;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> samples;
    std::set<std::pair<std::string, int>> reported;

    for (const auto& r : panel.rows()) {
        const YearMonth filing_month = r.filing_date.year_month();
        auto key = std::make_pair(r.firm_id, filing_month.index());
        auto it = vol_cache.find(key);
        if (it == vol_cache.end()) {
            std::vector<double> ra, rm;
            for (int lag = window; lag >= 1; --lag) {
                YearMonth m = filing_month.plus(-lag);
                const auto* obs = returns.find(r.firm_id, m);
                auto mk = market.find(m);
                if (!obs || mk == market.end()) break;
                ra.push_back(obs->excess_return);
                rm.push_back(mk->second);
            }
            std::optional<double> vol;
            if (static_cast<int>(ra.size()) == window) vol = idiosyncratic_volatility(ra, rm);
            it = vol_cache.emplace(key, vol).first;
        }
        if (!it->second) {
            if (reported.insert(key).second)
                result.warnings.push_back("skipped " + r.firm_id + " " + r.filing_date.iso() + ": fewer than " +
                                          std::to_string(window) + " months of returns");
            continue;
        }
        auto& s = samples[r.kind];
        s.first.push_back(r.value);
        s.second.push_back(*it->second);
    }

    for (const auto& [kind, s] : samples) {
        IdiosyncraticRow row;
        row.kind = kind;
        row.n = s.first.size();
        if (row.n >= 2) {
            row.covariance = stats::covariance(s.first, s.second);
            double vx = stats::variance(s.first), vy = stats::variance(s.second);
            if (vx <= 0.0 || vy <= 0.0) {
                row.degenerate = true;
                row.correlation = 0.0;
                result.warnings.push_back("correlation undefined for '" + kind + "' (zero variance); reported as 0");
            } else {
                row.correlation = row.covariance / std::sqrt(vx * vy);
            }
        } else {
            row.degenerate = true;
            result.warnings.push_back("fewer than 2 observations for '" + kind + "'");
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace cyber::score
