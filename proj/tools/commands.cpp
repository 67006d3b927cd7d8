#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cyberscore/cluster.hpp"
#include "cyberscore/embed.hpp"
#include "cyberscore/events.hpp"
#include "cyberscore/ingest.hpp"
#include "cyberscore/portfolio.hpp"
#include "cyberscore/pricing.hpp"
#include "cyberscore/rng.hpp"
#include "cyberscore/score.hpp"
#include "cyberscore/synth.hpp"
#include "cyberscore/table.hpp"
#include "cyberscore/textprep.hpp"

namespace cyber::cli {

using json = nlohmann::ordered_json;

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Parameters are hashed; paths are recorded in the config file but kept out
// of the hash so that relocating data or outputs leaves tables unchanged.
class Run {
public:
    Run(std::string sub, const fs::path& out, json params, json paths)
        : sub_(std::move(sub)), out_(out), params_(std::move(params)) {
        fs::create_directories(out_);
        hash_ = fnv1a_hex(json{{"subcommand", sub_}, {"parameters", params_}}.dump());
        json cfg{{"subcommand", sub_}, {"config_hash", hash_}, {"parameters", params_}, {"paths", std::move(paths)}};
        std::ofstream f(out_ / (sub_ + ".config.json"), std::ios::binary);
        f << cfg.dump(1) << '\n';
    }

    std::string provenance() const { return "subcommand=" + sub_ + " config_hash=" + hash_; }
    fs::path path(const std::string& name) const { return out_ / name; }
    void write(const TableWriter& w, const std::string& name, char delim = ',') const {
        w.write(path(name), provenance(), delim);
    }
    void note(const std::string& msg) const { std::cerr << sub_ << ": " << msg << '\n'; }

private:
    std::string sub_;
    fs::path out_;
    json params_;
    std::string hash_;
};

std::string p(const fs::path& x) { return x.string(); }
std::string p(const std::optional<fs::path>& x) { return x ? x->string() : ""; }

void require(const fs::path& path) {
    if (!fs::exists(path)) throw std::runtime_error("input not found: " + path.string());
}

template <typename T>
void report_issues(const Run& run, const std::string& what, const std::vector<T>& issues) {
    for (std::size_t i = 0; i < issues.size() && i < 10; ++i)
        run.note(what + " line " + std::to_string(issues[i].line) + ": " + issues[i].message);
    if (issues.size() > 10) run.note(what + ": " + std::to_string(issues.size() - 10) + " more row issues");
}

std::string fmt(double v) { return format_double(v); }

// ---- shared readers ----

std::vector<portfolio::PortfolioSeries> load_portfolios(const fs::path& path) {
    require(path);
    auto t = read_delimited(path);
    auto m = t.column("month");
    std::vector<portfolio::PortfolioSeries> out;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (j == m) continue;
        portfolio::PortfolioSeries s;
        s.name = t.header[j];
        for (const auto& row : t.rows) {
            s.months.push_back(YearMonth::parse(row.at(m)));
            s.returns.push_back(parse_double(row.at(j)));
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) throw std::runtime_error(path.string() + ": no portfolio columns");
    return out;
}

void write_portfolios(const Run& run, const std::string& name, const std::vector<portfolio::PortfolioSeries>& series) {
    std::vector<std::string> header{"month"};
    for (const auto& s : series) header.push_back(s.name);
    TableWriter w(header);
    for (std::size_t t = 0; t < series.front().size(); ++t) {
        std::vector<std::string> row{series.front().months[t].iso()};
        for (const auto& s : series) row.push_back(fmt(s.returns[t]));
        w.add_row(std::move(row));
    }
    run.write(w, name);
}

std::map<YearMonth, double> long_short_series(const fs::path& quintiles) {
    auto bins = load_portfolios(quintiles);
    auto ls = portfolio::long_short(bins.back(), bins.front());
    std::map<YearMonth, double> out;
    for (std::size_t i = 0; i < ls.size(); ++i) out[ls.months[i]] = ls.returns[i];
    return out;
}

ReturnsPanel load_returns_checked(const Run& run, const fs::path& path) {
    require(path);
    auto r = ingest::load_returns(path);
    report_issues(run, path.filename().string(), r.issues);
    return std::move(r.value);
}

ScorePanel load_scores_checked(const Run& run, const fs::path& path) {
    require(path);
    auto s = ingest::load_scores(path);
    report_issues(run, path.filename().string(), s.issues);
    if (s.value.empty()) throw std::runtime_error(path.string() + ": no scores");
    return std::move(s.value);
}

FactorPanel load_factors_checked(const fs::path& path) {
    require(path);
    return ingest::load_factors(path);
}

}  // namespace

// ---------------------------------------------------------------------------

void run_synth(const SynthOptions& o) {
    Run run("synth", o.out,
            {{"seed", o.seed}, {"firms", o.firms}, {"months", o.months}, {"kb_entries", o.kb_entries},
             {"blocks_per_filing", o.blocks_per_filing}},
            {{"out", p(o.out)}});
    synth::SynthConfig c;
    c.seed = o.seed;
    c.n_firms = o.firms;
    c.n_months = o.months;
    c.kb_entries = o.kb_entries;
    c.blocks_per_filing = o.blocks_per_filing;
    synth::write(o.out, synth::generate(c));
}

void run_prep(const PrepOptions& o) {
    Run run("prep", o.out, {{"common_limit", o.common_limit}, {"target_words", o.target_words}},
            {{"knowledgebase", p(o.knowledgebase)},
             {"filings", p(o.filings)},
             {"stopwords", p(o.stopwords)},
             {"common_words", p(o.common_words)},
             {"out", p(o.out)}});
    require(o.knowledgebase);
    require(o.filings);
    const auto kb = ingest::load_knowledgebase(o.knowledgebase);
    auto filings = ingest::load_filings(o.filings);
    report_issues(run, "filings", filings.issues);

    textprep::WordSet stop = o.stopwords ? textprep::load_word_list(*o.stopwords) : textprep::default_stopwords();
    textprep::WordSet common;
    if (o.common_words) {
        require(*o.common_words);
        common = textprep::load_word_list(*o.common_words, static_cast<std::size_t>(o.common_limit));
    } else {
        std::vector<std::vector<textprep::Sentence>> corpus;
        for (const auto& f : filings.value) corpus.push_back(textprep::preprocess(f.text, stop, {}));
        for (auto& w : textprep::most_common_words(corpus, static_cast<std::size_t>(o.common_limit))) common.insert(w);
    }

    std::vector<ingest::ParagraphRecord> records;
    std::size_t empty_kb = 0;
    for (std::size_t i = 0; i < kb.size(); ++i) {
        auto sentences = textprep::preprocess(kb[i].description, stop, common);
        textprep::Paragraph para;
        char id[32];
        std::snprintf(id, sizeof id, "kb-%04zu", i);
        para.doc_id = id;
        for (auto& s : sentences) para.tokens.insert(para.tokens.end(), s.begin(), s.end());
        if (para.tokens.empty()) {
            ++empty_kb;
            continue;
        }
        records.push_back({std::move(para), "kb", kb[i].tactic, ""});
    }
    if (empty_kb) run.note(std::to_string(empty_kb) + " knowledgebase entries had no tokens left and were skipped");
    std::set<std::string> seen;
    for (const auto& f : filings.value) {
        std::string id = f.firm_id + "_" + f.filing_date.iso();
        if (!seen.insert(id).second) throw std::runtime_error("duplicate filing: " + id);
        auto sentences = textprep::preprocess(f.text, stop, common);
        for (auto& para : textprep::segment_paragraphs(id, sentences, static_cast<std::size_t>(o.target_words)))
            records.push_back({std::move(para), "filing", f.firm_id, f.filing_date.iso()});
    }
    ingest::save_paragraphs(run.path("paragraphs.tsv"), records, run.provenance());
    run.note(std::to_string(kb.size()) + " knowledgebase entries, " + std::to_string(filings.value.size()) +
             " filings, " + std::to_string(records.size()) + " paragraphs");
}

void run_embed(const EmbedOptions& o) {
    Run run("embed", o.out,
            {{"seed", o.seed}, {"dim", o.dim}, {"epochs", o.epochs}, {"negatives", o.negatives},
             {"learning_rate", o.learning_rate}, {"infer_steps", o.infer_steps}},
            {{"paragraphs", p(o.paragraphs)}, {"out", p(o.out)}});
    require(o.paragraphs);
    auto records = ingest::load_paragraphs(o.paragraphs);
    std::vector<textprep::Paragraph> train, infer;
    for (const auto& r : records) (o.infer_steps > 0 && r.source != "kb" ? infer : train).push_back(r.paragraph);

    embed::DbowConfig cfg;
    cfg.dim = static_cast<std::size_t>(o.dim);
    cfg.epochs = o.epochs;
    cfg.negatives = o.negatives;
    cfg.learning_rate = o.learning_rate;
    cfg.seed = o.seed;
    auto result = embed::train_dbow(train, cfg);

    std::map<embed::ParagraphRef, std::vector<double>> by_ref;
    for (auto& v : result.vectors) by_ref[v.ref] = std::move(v.values);
    for (std::size_t i = 0; i < infer.size(); ++i) {
        auto v = embed::infer_vector(result.model, infer[i], o.infer_steps, mix_seed(o.seed, 1000003 + i),
                                     o.learning_rate);
        by_ref[v.ref] = std::move(v.values);
    }
    std::vector<embed::EmbeddingVector> ordered;
    for (const auto& r : records) {
        embed::ParagraphRef ref{r.paragraph.doc_id, r.paragraph.index};
        ordered.push_back({ref, by_ref.at(ref)});
    }
    {
        std::ofstream out(run.path("vectors.tsv"), std::ios::binary);
        out << "# " << run.provenance() << '\n';
        embed::write_vectors(out, ordered);
    }
    TableWriter loss({"epoch", "mean_loss"});
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        loss.add_row({std::to_string(e + 1), fmt(result.epoch_loss[e])});
    run.write(loss, "embed_loss.csv");
}

namespace {

struct KbVectors {
    std::vector<embed::EmbeddingVector> vectors;
    std::vector<std::string> tactics;
};

std::map<embed::ParagraphRef, std::vector<double>> load_vector_map(const fs::path& path) {
    require(path);
    std::map<embed::ParagraphRef, std::vector<double>> out;
    for (auto& v : embed::load_vectors(path))
        if (!out.emplace(v.ref, std::move(v.values)).second)
            throw std::runtime_error("duplicate vector for " + v.ref.doc_id);
    return out;
}

}  // namespace

void run_cluster(const ClusterOptions& o) {
    json k = json::array(), egn = json::array();
    for (int x : o.kmeans_k) k.push_back(x);
    for (int x : o.spectral_egn) egn.push_back(x);
    Run run("cluster", o.out,
            {{"seed", o.seed}, {"low", o.low}, {"high", o.high}, {"high_value", o.high_value}, {"kmeans_k", k},
             {"spectral_k", o.spectral_k}, {"spectral_egn", egn}, {"reference_groups", o.reference_groups}},
            {{"paragraphs", p(o.paragraphs)}, {"vectors", p(o.vectors)}, {"out", p(o.out)}});
    require(o.paragraphs);
    auto records = ingest::load_paragraphs(o.paragraphs);
    auto vecs = load_vector_map(o.vectors);
    KbVectors kb;
    for (const auto& r : records) {
        if (r.source != "kb") continue;
        embed::ParagraphRef ref{r.paragraph.doc_id, r.paragraph.index};
        auto it = vecs.find(ref);
        if (it == vecs.end()) throw std::runtime_error("no vector for " + ref.doc_id);
        kb.vectors.push_back({ref, it->second});
        kb.tactics.push_back(r.label);
    }
    if (kb.vectors.empty()) throw std::runtime_error("no knowledgebase paragraphs");

    auto s = cluster::build_similarity(kb.vectors, kb.tactics);
    cluster::GridConfig grid;
    grid.low = o.low;
    grid.high = o.high;
    grid.high_value = o.high_value;
    grid.kmeans_k = o.kmeans_k;
    grid.spectral.clear();
    for (int e : o.spectral_egn) grid.spectral.emplace_back(o.spectral_k, e);
    grid.seed = o.seed;
    Eigen::MatrixXd points(static_cast<Eigen::Index>(kb.vectors.size()),
                           static_cast<Eigen::Index>(kb.vectors.front().dim()));
    for (std::size_t i = 0; i < kb.vectors.size(); ++i)
        for (std::size_t j = 0; j < kb.vectors[i].dim(); ++j)
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kb.vectors[i].values[j];
    auto rows = cluster::run_grid(s, points, grid);

    TableWriter table({"method", "hyperparams", "k", "entropy_sum", "balanced_score", "modularity"});
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        table.add_row({r.method, r.hyperparams, std::to_string(r.k), fmt(r.entropy_sum), fmt(r.balanced_score),
                       fmt(r.modularity)});
        // Lowest entropy, then highest modularity, then most balanced.
        const auto& b = rows[best];
        if (std::make_tuple(r.entropy_sum, -r.modularity, r.balanced_score) <
            std::make_tuple(b.entropy_sum, -b.modularity, b.balanced_score))
            best = i;
    }
    run.write(table, "cluster_grid.csv");

    TableWriter assign({"method", "hyperparams", "tactic", "cluster"});
    for (const auto& r : rows)
        for (const auto& [tactic, c] : cluster::majority_assign(r.assignment, kb.tactics))
            assign.add_row({r.method, r.hyperparams, tactic, std::to_string(c)});
    run.write(assign, "cluster_assignments.csv");

    std::map<std::string, std::string> groups;
    std::string chosen;
    if (o.reference_groups) {
        groups = cluster::reference_super_tactics();
        chosen = "reference";
    } else {
        auto tactic_to_cluster = cluster::majority_assign(rows[best].assignment, kb.tactics);
        auto names = cluster::name_clusters(tactic_to_cluster);
        for (const auto& [tactic, c] : tactic_to_cluster) groups[tactic] = names.at(c);
        chosen = rows[best].method + " " + rows[best].hyperparams;
    }
    TableWriter st({"tactic", "super_tactic", "source"});
    for (const auto& [tactic, g] : groups) st.add_row({tactic, g, chosen});
    run.write(st, "super_tactics.csv");
    run.note("selected grouping: " + chosen);
}

void run_score(const ScoreOptions& o) {
    Run run("score", o.out, {{"trim", o.trim}, {"idio_window", o.idio_window}},
            {{"paragraphs", p(o.paragraphs)},
             {"vectors", p(o.vectors)},
             {"super_tactics", p(o.super_tactics)},
             {"returns", p(o.returns)},
             {"factors", p(o.factors)},
             {"out", p(o.out)}});
    require(o.paragraphs);
    require(o.super_tactics);
    auto records = ingest::load_paragraphs(o.paragraphs);
    auto vecs = load_vector_map(o.vectors);
    std::map<std::string, std::string> groups;
    {
        auto t = read_delimited(o.super_tactics);
        auto tc = t.column("tactic"), gc = t.column("super_tactic");
        for (const auto& row : t.rows) groups[row.at(tc)] = row.at(gc);
    }

    std::vector<embed::EmbeddingVector> kb_vecs;
    score::KnowledgebaseVectors kb;
    struct Pending {
        std::string firm;
        Date date;
        std::vector<std::vector<std::string>> tokens;
        std::vector<embed::EmbeddingVector> vectors;
    };
    std::vector<Pending> filings;
    std::map<std::string, std::size_t> filing_index;
    for (const auto& r : records) {
        embed::ParagraphRef ref{r.paragraph.doc_id, r.paragraph.index};
        auto it = vecs.find(ref);
        if (it == vecs.end()) throw std::runtime_error("no vector for " + ref.doc_id);
        if (r.source == "kb") {
            kb_vecs.push_back({ref, it->second});
            kb.tactics.push_back(r.label);
            continue;
        }
        auto [fi, inserted] = filing_index.emplace(r.paragraph.doc_id, filings.size());
        if (inserted) filings.push_back({r.label, Date::parse(r.date), {}, {}});
        auto& f = filings[fi->second];
        f.tokens.push_back(r.paragraph.tokens);
        f.vectors.push_back({ref, it->second});
    }
    kb.unit = score::unit_rows(kb_vecs);

    ScorePanel panel;
    const auto& dict = score::default_risk_dictionary();
    for (const auto& f : filings) {
        score::FilingInput in{f.firm, f.date, f.tokens, score::unit_rows(f.vectors)};
        for (auto& row : score::score_filing(in, kb, groups, dict, o.trim)) panel.add(std::move(row));
    }
    {
        std::ofstream out(run.path("scores.csv"), std::ios::binary);
        ingest::write_scores(out, panel, run.provenance());
    }
    TableWriter yearly({"year", "score_kind", "n", "mean", "p5", "p25", "p50", "p75", "p95"});
    for (const auto& y : score::aggregate_yearly(panel)) {
        std::vector<std::string> row{std::to_string(y.year), y.kind, std::to_string(y.n), fmt(y.mean)};
        for (double v : y.percentiles) row.push_back(fmt(v));
        yearly.add_row(std::move(row));
    }
    run.write(yearly, "scores_yearly.csv");

    if (o.returns && o.factors) {
        auto returns = load_returns_checked(run, *o.returns);
        auto factors = load_factors_checked(*o.factors);
        std::map<YearMonth, double> market;
        auto mk = factors.column("mkt");
        for (std::size_t t = 0; t < factors.months.size(); ++t) market[factors.months[t]] = mk(static_cast<Eigen::Index>(t));
        auto idio = score::idiosyncratic_stats(panel, returns, market, o.idio_window);
        TableWriter w({"score_kind", "n", "covariance", "correlation", "degenerate"});
        for (const auto& r : idio.rows)
            w.add_row({r.kind, std::to_string(r.n), fmt(r.covariance), fmt(r.correlation), r.degenerate ? "1" : "0"});
        run.write(w, "idiosyncratic.csv");
        run.note(std::to_string(idio.warnings.size()) + " idiosyncratic-volatility warnings");
    }
    run.note(std::to_string(filings.size()) + " filings scored");
}

void run_sort(const SortOptions& o) {
    json bins = json::array(), ds = json::array();
    for (int b : o.bins) bins.push_back(b);
    for (const auto& c : o.double_sort) ds.push_back(c);
    Run run("sort", o.out, {{"bins", bins}, {"kind", o.kind}, {"weighting", o.weighting}, {"double_sort", ds}},
            {{"returns", p(o.returns)}, {"scores", p(o.scores)}, {"out", p(o.out)}});
    auto returns = load_returns_checked(run, o.returns);
    auto scores = load_scores_checked(run, o.scores);
    portfolio::SortOptions so;
    so.score_kind = o.kind;
    if (o.weighting == "quarter") so.weighting = portfolio::Weighting::QuarterEndCap;
    else if (o.weighting == "monthly") so.weighting = portfolio::Weighting::MonthlyCap;
    else throw std::invalid_argument("weighting must be quarter or monthly");

    for (int nb : o.bins) {
        so.n_bins = nb;
        auto res = portfolio::quantile_sort(returns, scores, so);
        if (res.bins.front().returns.empty()) throw std::runtime_error("sort produced no months");
        const std::string tag = std::to_string(nb);
        write_portfolios(run, "portfolios_" + tag + ".csv", res.bins);

        TableWriter f({"quarter", "asset_id", "bin", "score_date", "score", "cap"});
        for (const auto& x : res.formations)
            f.add_row({x.quarter.iso(), x.asset_id, std::to_string(x.bin + 1), x.score_date.iso(), fmt(x.score),
                       fmt(x.cap)});
        run.write(f, "formations_" + tag + ".csv");

        TableWriter s({"portfolio", "months", "mean", "stddev", "t_stat", "sharpe"});
        auto add = [&](const portfolio::PortfolioSeries& x) {
            auto m = portfolio::summarize(x);
            s.add_row({x.name, std::to_string(m.n), fmt(m.mean), fmt(m.stddev), fmt(m.t_stat), fmt(m.sharpe)});
        };
        for (const auto& b : res.bins) add(b);
        add(portfolio::long_short(res.bins.back(), res.bins.front()));
        run.write(s, "summary_" + tag + ".csv");
        for (const auto& w : res.warnings) run.note(w);
    }

    so.n_bins = 5;
    for (const auto& c : o.double_sort) {
        auto d = portfolio::double_sort(returns, scores, c, 5, 5, so);
        TableWriter w({"characteristic_bin", "P1", "P2", "P3", "P4", "P5", "P5-P1", "flagged"});
        for (int q = 0; q < d.n_outer; ++q) {
            const auto& m = d.mean_returns[static_cast<std::size_t>(q)];
            std::vector<std::string> row{"Q" + std::to_string(q + 1)};
            for (double v : m) row.push_back(fmt(v));
            row.push_back(fmt(m.back() - m.front()));
            row.push_back(d.flagged[static_cast<std::size_t>(q)] ? "1" : "0");
            w.add_row(std::move(row));
        }
        run.write(w, "double_sort_" + c + ".csv");
    }
}

void run_alphas(const AlphasOptions& o) {
    Run run("alphas", o.out, {{"hac_lags", o.hac_lags}},
            {{"portfolios", p(o.portfolios)}, {"factors", p(o.factors)}, {"out", p(o.out)}});
    auto bins = load_portfolios(o.portfolios);
    auto factors = load_factors_checked(o.factors);
    bins.push_back(portfolio::long_short(bins.back(), bins.front()));
    TableWriter w({"portfolio", "model", "alpha", "alpha_t", "r_squared_adj", "months"});
    OlsOptions opts;
    opts.hac_lags = o.hac_lags;
    for (const auto& b : bins)
        for (auto model : {pricing::FactorModel::CAPM, pricing::FactorModel::FFC, pricing::FactorModel::FF5}) {
            auto fit = pricing::ts_alpha(b, factors, model, opts);
            w.add_row({b.name, pricing::model_name(model), fmt(fit.coefficients(0)), fmt(fit.t_stats(0)),
                       fmt(fit.r_squared_adj), std::to_string(b.size())});
        }
    run.write(w, "alphas.csv");
}

void run_fm(const FmOptions& o) {
    Run run("fm", o.out, {{"window", o.window}, {"bins", o.bins}, {"kind", o.kind}},
            {{"returns", p(o.returns)}, {"scores", p(o.scores)}, {"factors", p(o.factors)}, {"out", p(o.out)}});
    auto returns = load_returns_checked(run, o.returns);
    auto scores = load_scores_checked(run, o.scores);
    auto factors = load_factors_checked(o.factors);
    portfolio::SortOptions so;
    so.n_bins = o.bins;
    so.score_kind = o.kind;
    auto sorted = portfolio::quantile_sort(returns, scores, so);
    pricing::FmInputs in{&returns, &factors, &sorted, o.window};

    TableWriter coef({"model", "coefficient", "mean", "std_error", "t_stat"});
    TableWriter summary({"model", "months", "collinear_months", "mean_r_squared_adj", "mape"});
    for (const auto& model : pricing::default_fm_models()) {
        auto r = pricing::fama_macbeth(in, model);
        for (const auto& pr : r.premia) coef.add_row({model.name, pr.name, fmt(pr.mean), fmt(pr.std_error), fmt(pr.t_stat)});
        summary.add_row({model.name, std::to_string(r.months.size()), std::to_string(r.collinear_months.size()),
                         fmt(r.mean_r_squared_adj), fmt(r.mape)});
    }
    run.write(coef, "fm.csv");
    run.write(summary, "fm_summary.csv");
}

namespace {

// Aligns portfolio columns and factor columns on common months.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> align(const std::vector<portfolio::PortfolioSeries>& bins,
                                                  const FactorPanel& f, const std::vector<std::string>& names,
                                                  const std::map<YearMonth, double>* extra) {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> frows;
    for (std::size_t t = 0; t < bins.front().size(); ++t) {
        auto m = bins.front().months[t];
        auto fr = f.row_of(m);
        if (!fr || (extra && !extra->contains(m))) continue;
        rows.push_back(t);
        frows.push_back(*fr);
    }
    const auto T = static_cast<Eigen::Index>(rows.size());
    const auto N = static_cast<Eigen::Index>(bins.size());
    const auto K = static_cast<Eigen::Index>(names.size() + (extra ? 1 : 0));
    Eigen::MatrixXd R(T, N), F(T, K);
    auto sub = f.select(names);
    for (Eigen::Index t = 0; t < T; ++t) {
        for (Eigen::Index n = 0; n < N; ++n) R(t, n) = bins[static_cast<std::size_t>(n)].returns[rows[static_cast<std::size_t>(t)]];
        F.row(t).head(static_cast<Eigen::Index>(names.size())) = sub.values.row(static_cast<Eigen::Index>(frows[static_cast<std::size_t>(t)]));
        if (extra) F(t, K - 1) = extra->at(bins.front().months[rows[static_cast<std::size_t>(t)]]);
    }
    return {R, F};
}

}  // namespace

void run_grs(const GrsOptions& o) {
    Run run("grs", o.out, json::object(),
            {{"portfolios", p(o.portfolios)}, {"factors", p(o.factors)}, {"cyber_portfolios", p(o.cyber_portfolios)},
             {"out", p(o.out)}});
    auto bins = load_portfolios(o.portfolios);
    auto factors = load_factors_checked(o.factors);
    std::optional<std::map<YearMonth, double>> cyber;
    if (o.cyber_portfolios) cyber = long_short_series(*o.cyber_portfolios);
    TableWriter w({"model", "with_cyber", "statistic", "p_value", "N", "T", "K", "mean_r_squared_adj"});
    for (auto model : {pricing::FactorModel::CAPM, pricing::FactorModel::FFC, pricing::FactorModel::FF5}) {
        for (bool with : {false, true}) {
            if (with && !cyber) continue;
            auto [R, F] = align(bins, factors, pricing::model_factors(model), cyber ? &*cyber : nullptr);
            if (!with && cyber) F.conservativeResize(Eigen::NoChange, F.cols() - 1);
            auto g = pricing::grs_test(R, F);
            w.add_row({pricing::model_name(model), with ? "1" : "0", fmt(g.statistic), fmt(g.p_value),
                       std::to_string(g.N), std::to_string(g.T), std::to_string(g.K), fmt(g.mean_r_squared)});
        }
    }
    run.write(w, "grs.csv");
}

void run_bgrs(const BgrsOptions& o) {
    Run run("bgrs", o.out,
            {{"prior", o.prior}, {"kmode", o.kmode}, {"expanding", o.expanding}, {"min_window", o.min_window}},
            {{"factors", p(o.factors)}, {"cyber_portfolios", p(o.cyber_portfolios)}, {"out", p(o.out)}});
    auto factors = load_factors_checked(o.factors);
    std::vector<std::string> candidates;
    for (const auto& n : factors.names)
        if (n != "mkt") candidates.push_back(n);
    if (o.cyber_portfolios) {
        factors = factors.with_column("cyber", long_short_series(*o.cyber_portfolios));
        candidates.push_back("cyber");
    }
    pricing::BsOptions bo;
    bo.prior = o.prior;
    bo.kmode = pricing::parse_kmode(o.kmode);
    bo.expanding = o.expanding;
    bo.min_window = o.min_window;
    run.note("kmode=" + pricing::kmode_name(bo.kmode));
    auto post = pricing::bs_posteriors(factors, "mkt", candidates, bo);

    TableWriter paths({"end_month", "subset", "probability"});
    TableWriter cum({"end_month", "factor", "probability"});
    for (const auto& s : post.path) {
        for (std::size_t j = 0; j < post.subsets.size(); ++j)
            paths.add_row({s.end_month.iso(), pricing::subset_label(post.subsets[j], candidates), fmt(s.probabilities[j])});
        for (std::size_t i = 0; i < candidates.size(); ++i)
            cum.add_row({s.end_month.iso(), candidates[i], fmt(s.cumulative[i])});
    }
    run.write(paths, "bgrs_paths.csv");
    run.write(cum, "bgrs_cumulative.csv");
}

void run_event(const EventOptions& o) {
    Run run("event", o.out, json::object(),
            {{"daily", p(o.daily)}, {"calendar", p(o.calendar)}, {"event", p(o.event)},
             {"formations", p(o.formations)}, {"out", p(o.out)}});
    require(o.daily);
    require(o.calendar);
    require(o.event);
    require(o.formations);
    auto daily = ingest::load_daily(o.daily);
    report_issues(run, "daily", daily.issues);
    auto calendar = ingest::load_calendar(o.calendar);
    auto cfg = ingest::load_event_config(o.event);
    auto mk = daily.value.series.find("MKT");
    if (mk == daily.value.series.end()) throw std::runtime_error("daily returns lack the MKT series");

    // Holdings of the quarter containing the event.
    const YearMonth q = cfg.event_date.year_month().quarter_start();
    std::map<int, std::map<std::string, double>> holdings;
    {
        auto t = read_delimited(o.formations);
        auto qc = t.column("quarter"), ac = t.column("asset_id"), bc = t.column("bin"), cc = t.column("cap");
        for (const auto& row : t.rows)
            if (YearMonth::parse(row.at(qc)) == q) holdings[std::stoi(row.at(bc))][row.at(ac)] = parse_double(row.at(cc));
    }
    if (holdings.empty()) throw std::runtime_error("no portfolio formation for quarter " + q.iso());

    TableWriter w({"portfolio", "window", "car", "t_stat", "length", "alpha", "beta", "residual_sd"});
    for (const auto& [bin, weights] : holdings) {
        auto series = events::weighted_daily(daily.value, weights, calendar);
        auto study = events::car(series, mk->second, cfg.event_date, calendar, cfg.windows, cfg.estimation_days);
        for (const auto& r : study.windows)
            w.add_row({"P" + std::to_string(bin), r.window.label(), fmt(r.car), fmt(r.t_stat), std::to_string(r.length),
                       fmt(study.model.alpha), fmt(study.model.beta), fmt(study.model.residual_sd)});
    }
    run.write(w, "event.csv");
}

void run_welch(const WelchOptions& o) {
    Run run("welch", o.out, json::object(), {{"portfolios", p(o.portfolios)}, {"out", p(o.out)}});
    auto bins = load_portfolios(o.portfolios);
    TableWriter w({"a", "b", "mean_difference", "t_stat", "df", "p_value"});
    for (std::size_t i = 1; i < bins.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            auto r = events::welch_test(bins[i].returns, bins[j].returns);
            w.add_row({bins[i].name, bins[j].name, fmt(r.mean_difference), fmt(r.t_stat), fmt(r.df), fmt(r.p_value)});
        }
    run.write(w, "welch.csv");
}

void run_report(const ReportOptions& o) {
    const fs::path d = o.data;
    require(d / "knowledgebase.json");
    Run run("report", o.out,
            {{"seed", o.seed}, {"infer_steps", o.infer_steps}, {"epochs", o.epochs}, {"prior", o.prior},
             {"kmode", o.kmode}, {"hac_lags", o.hac_lags}, {"include_amended", o.include_amended}},
            {{"data", p(o.data)}, {"out", p(o.out)}});

    PrepOptions prep{d / "knowledgebase.json", d / "filings.jsonl", o.out, std::nullopt, std::nullopt};
    if (fs::exists(d / "common_words.txt")) prep.common_words = d / "common_words.txt";
    run_prep(prep);

    EmbedOptions em;
    em.paragraphs = o.out / "paragraphs.tsv";
    em.out = o.out;
    em.seed = o.seed;
    em.epochs = o.epochs;
    em.infer_steps = o.infer_steps;
    run_embed(em);

    ClusterOptions cl;
    cl.paragraphs = em.paragraphs;
    cl.vectors = o.out / "vectors.tsv";
    cl.out = o.out;
    cl.seed = o.seed;
    run_cluster(cl);

    ScoreOptions sc;
    sc.paragraphs = em.paragraphs;
    sc.vectors = cl.vectors;
    sc.super_tactics = o.out / "super_tactics.csv";
    sc.out = o.out;
    sc.returns = d / "returns.csv";
    sc.factors = d / "factors.csv";
    run_score(sc);

    SortOptions so;
    so.returns = d / "returns.csv";
    so.scores = o.out / "scores.csv";
    so.out = o.out;
    run_sort(so);

    run_alphas({o.out / "portfolios_5.csv", d / "factors.csv", o.out, o.hac_lags});
    run_fm({d / "returns.csv", o.out / "scores.csv", d / "factors.csv", o.out});
    run_grs({o.out / "portfolios_20.csv", d / "factors.csv", o.out, o.out / "portfolios_5.csv"});
    BgrsOptions bg;
    bg.factors = d / "factors.csv";
    bg.out = o.out;
    bg.cyber_portfolios = o.out / "portfolios_5.csv";
    bg.prior = o.prior;
    bg.kmode = o.kmode;
    run_bgrs(bg);
    run_event({d / "daily.csv", d / "calendar.txt", d / "event.json", o.out / "formations_5.csv", o.out});
    run_welch({o.out / "portfolios_5.csv", o.out});

    // EDGAR index screening.
    {
        std::ifstream in(d / "edgar_index.idx");
        if (!in) throw std::runtime_error("input not found: " + (d / "edgar_index.idx").string());
        auto parsed = ingest::parse_edgar_index(in, {o.include_amended});
        TableWriter w({"metric", "value"});
        w.add_row({"annual_reports", std::to_string(parsed.value.size())});
        w.add_row({"malformed_lines", std::to_string(parsed.issues.size())});
        run.write(w, "edgar_summary.csv");
        report_issues(run, "edgar index", parsed.issues);
    }

    // Determinants of the overall score: firm and industry fixed effects.
    {
        auto returns = load_returns_checked(run, d / "returns.csv");
        auto scores = load_scores_checked(run, o.out / "scores.csv");
        auto sic = ingest::SicMap::load(d / "sic_ranges.csv");
        std::map<std::string, std::string> industry;
        auto firms = read_delimited(d / "firms.csv");
        auto fc = firms.column("firm_id"), scc = firms.column("sic");
        for (const auto& row : firms.rows) industry[row.at(fc)] = sic.industry_of(std::stoi(row.at(scc)));

        const std::vector<std::string> names{"size", "book_to_market", "beta"};
        std::vector<pricing::PanelRow> rows;
        for (const auto& s : scores.rows()) {
            if (s.kind != kOverallKind) continue;
            const auto* obs = returns.find(s.firm_id, s.filing_date.year_month().plus(-1));
            if (!obs) continue;
            pricing::PanelRow r{s.firm_id, industry.count(s.firm_id) ? industry[s.firm_id] : "Other",
                                s.filing_date.year, s.value * 100.0, {}};
            bool ok = true;
            for (const auto& n : names) {
                auto it = obs->characteristics.find(n);
                if (it == obs->characteristics.end()) {
                    ok = false;
                    break;
                }
                r.x.push_back(it->second);
            }
            if (ok) rows.push_back(std::move(r));
        }
        TableWriter w({"fixed_effects", "variable", "coefficient", "se_clustered", "se_unclustered", "t_stat",
                       "r_squared_within", "observations", "clusters"});
        for (auto [fe, label] : {std::pair{pricing::FixedEffects::FirmYear, "firm+year"},
                                 std::pair{pricing::FixedEffects::IndustryYear, "industry+year"}}) {
            auto r = pricing::fe_determinants(rows, names, fe);
            for (std::size_t j = 0; j < r.names.size(); ++j) {
                auto jj = static_cast<Eigen::Index>(j);
                w.add_row({label, r.names[j], fmt(r.coefficients(jj)), fmt(r.clustered_se(jj)),
                           fmt(r.unclustered_se(jj)), fmt(r.t_stats(jj)), fmt(r.r_squared_within),
                           std::to_string(r.n_obs), std::to_string(r.n_clusters)});
            }
            for (const auto& m : r.warnings) run.note(m);
        }
        run.write(w, "determinants.csv");
    }
}

}  // namespace cyber::cli
