#include <CLI11.hpp>
#include <exception>
#include <functional>
#include <iostream>

#include "commands.hpp"

namespace cli = cyber::cli;

int main(int argc, char** argv) {
    CLI::App app{"Cyber-risk scores from annual reports and their asset-pricing tests", "cyberscore"};
    app.require_subcommand(1);
    std::function<void()> action;

    cli::SynthOptions synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic data set with planted structure");
    s->add_option("--out", synth.out, "Output directory")->required();
    s->add_option("--seed", synth.seed, "Random seed")->required();
    s->add_option("--firms", synth.firms)->capture_default_str();
    s->add_option("--months", synth.months)->capture_default_str();
    s->add_option("--kb-entries", synth.kb_entries)->capture_default_str();
    s->add_option("--blocks-per-filing", synth.blocks_per_filing)->capture_default_str();
    s->callback([&] { action = [&] { cli::run_synth(synth); }; });

    cli::PrepOptions prep;
    auto* p = app.add_subcommand("prep", "Normalize and segment knowledgebase and filing text");
    p->add_option("--knowledgebase", prep.knowledgebase)->required();
    p->add_option("--filings", prep.filings)->required();
    p->add_option("--out", prep.out)->required();
    p->add_option("--stopwords", prep.stopwords, "Stop-word list (default: built-in English list)");
    p->add_option("--common-words", prep.common_words, "Ranked common-word list (default: computed from filings)");
    p->add_option("--common-limit", prep.common_limit)->capture_default_str();
    p->add_option("--target-words", prep.target_words)->capture_default_str();
    p->callback([&] { action = [&] { cli::run_prep(prep); }; });

    cli::EmbedOptions embed;
    auto* e = app.add_subcommand("embed", "Train paragraph vectors");
    e->add_option("--paragraphs", embed.paragraphs)->required();
    e->add_option("--out", embed.out)->required();
    e->add_option("--seed", embed.seed)->required();
    e->add_option("--dim", embed.dim)->capture_default_str();
    e->add_option("--epochs", embed.epochs)->capture_default_str();
    e->add_option("--negatives", embed.negatives)->capture_default_str();
    e->add_option("--learning-rate", embed.learning_rate)->capture_default_str();
    e->add_option("--infer-steps", embed.infer_steps,
                  "Train on the knowledgebase only and infer filings with this many passes (0: train jointly)")
        ->capture_default_str();
    e->callback([&] { action = [&] { cli::run_embed(embed); }; });

    cli::ClusterOptions clus;
    auto* c = app.add_subcommand("cluster", "Cluster knowledgebase paragraphs into super-tactics");
    c->add_option("--paragraphs", clus.paragraphs)->required();
    c->add_option("--vectors", clus.vectors)->required();
    c->add_option("--out", clus.out)->required();
    c->add_option("--seed", clus.seed)->required();
    c->add_option("--low", clus.low)->capture_default_str();
    c->add_option("--high", clus.high)->capture_default_str();
    c->add_option("--high-value", clus.high_value)->capture_default_str();
    c->add_option("--kmeans-k", clus.kmeans_k)->capture_default_str();
    c->add_option("--spectral-k", clus.spectral_k)->capture_default_str();
    c->add_option("--spectral-egn", clus.spectral_egn)->capture_default_str();
    c->add_flag("--reference-groups", clus.reference_groups, "Score with the reference four-group mapping");
    c->callback([&] { action = [&] { cli::run_cluster(clus); }; });

    cli::ScoreOptions score;
    auto* sc = app.add_subcommand("score", "Score filings against the knowledgebase");
    sc->add_option("--paragraphs", score.paragraphs)->required();
    sc->add_option("--vectors", score.vectors)->required();
    sc->add_option("--super-tactics", score.super_tactics)->required();
    sc->add_option("--out", score.out)->required();
    sc->add_option("--returns", score.returns, "Monthly returns, enables the idiosyncratic-volatility table");
    sc->add_option("--factors", score.factors);
    sc->add_option("--trim", score.trim)->capture_default_str();
    sc->add_option("--idio-window", score.idio_window)->capture_default_str();
    sc->callback([&] { action = [&] { cli::run_score(score); }; });

    cli::SortOptions sort;
    auto* so = app.add_subcommand("sort", "Quantile and double sorts on scores");
    so->add_option("--returns", sort.returns)->required();
    so->add_option("--scores", sort.scores)->required();
    so->add_option("--out", sort.out)->required();
    so->add_option("--bins", sort.bins)->capture_default_str();
    so->add_option("--kind", sort.kind)->capture_default_str();
    so->add_option("--weighting", sort.weighting, "quarter or monthly")->capture_default_str();
    so->add_option("--double-sort", sort.double_sort)->capture_default_str();
    so->callback([&] { action = [&] { cli::run_sort(sort); }; });

    cli::AlphasOptions alphas;
    auto* a = app.add_subcommand("alphas", "Time-series alphas of sorted portfolios");
    a->add_option("--portfolios", alphas.portfolios)->required();
    a->add_option("--factors", alphas.factors)->required();
    a->add_option("--out", alphas.out)->required();
    a->add_option("--hac-lags", alphas.hac_lags, "Newey-West lags (negative: plain OLS)")->capture_default_str();
    a->callback([&] { action = [&] { cli::run_alphas(alphas); }; });

    cli::FmOptions fm;
    auto* f = app.add_subcommand("fm", "Fama-MacBeth two-pass regressions");
    f->add_option("--returns", fm.returns)->required();
    f->add_option("--scores", fm.scores)->required();
    f->add_option("--factors", fm.factors)->required();
    f->add_option("--out", fm.out)->required();
    f->add_option("--window", fm.window)->capture_default_str();
    f->add_option("--bins", fm.bins)->capture_default_str();
    f->add_option("--kind", fm.kind)->capture_default_str();
    f->callback([&] { action = [&] { cli::run_fm(fm); }; });

    cli::GrsOptions grs;
    auto* g = app.add_subcommand("grs", "GRS joint test of portfolio alphas");
    g->add_option("--portfolios", grs.portfolios)->required();
    g->add_option("--factors", grs.factors)->required();
    g->add_option("--out", grs.out)->required();
    g->add_option("--cyber-portfolios", grs.cyber_portfolios, "Quintile file whose P5-P1 spread is added as a factor");
    g->callback([&] { action = [&] { cli::run_grs(grs); }; });

    cli::BgrsOptions bgrs;
    auto* b = app.add_subcommand("bgrs", "Bayesian comparison of factor subsets");
    b->add_option("--factors", bgrs.factors)->required();
    b->add_option("--out", bgrs.out)->required();
    b->add_option("--cyber-portfolios", bgrs.cyber_portfolios);
    b->add_option("--prior", bgrs.prior)->capture_default_str();
    b->add_option("--kmode", bgrs.kmode, "original or as-printed")->capture_default_str();
    b->add_option("--expanding", bgrs.expanding)->capture_default_str();
    b->add_option("--min-window", bgrs.min_window)->capture_default_str();
    b->callback([&] { action = [&] { cli::run_bgrs(bgrs); }; });

    cli::EventOptions event;
    auto* ev = app.add_subcommand("event", "Cumulative abnormal returns around an event date");
    ev->add_option("--daily", event.daily)->required();
    ev->add_option("--calendar", event.calendar)->required();
    ev->add_option("--event", event.event)->required();
    ev->add_option("--formations", event.formations)->required();
    ev->add_option("--out", event.out)->required();
    ev->callback([&] { action = [&] { cli::run_event(event); }; });

    cli::WelchOptions welch;
    auto* w = app.add_subcommand("welch", "Welch tests between portfolio return series");
    w->add_option("--portfolios", welch.portfolios)->required();
    w->add_option("--out", welch.out)->required();
    w->callback([&] { action = [&] { cli::run_welch(welch); }; });

    cli::ReportOptions report;
    auto* r = app.add_subcommand("report", "Run the whole chain on a data directory");
    r->add_option("--data", report.data)->required();
    r->add_option("--out", report.out)->required();
    r->add_option("--seed", report.seed)->required();
    r->add_option("--epochs", report.epochs)->capture_default_str();
    r->add_option("--infer-steps", report.infer_steps)->capture_default_str();
    r->add_option("--prior", report.prior)->capture_default_str();
    r->add_option("--kmode", report.kmode)->capture_default_str();
    r->add_option("--hac-lags", report.hac_lags)->capture_default_str();
    r->add_flag("--include-10ka", report.include_amended, "Keep amended annual reports in the EDGAR screen");
    r->callback([&] { action = [&] { cli::run_report(report); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        std::cerr << app.help() << '\n';
        int code = app.exit(ex);
        return code == 0 ? 2 : code;
    }
    try {
        action();
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
