// Subcommand implementations behind the cyberscore executable. Each command
// reads its inputs from files, writes delimited tables into an output
// directory and records its resolved configuration next to them.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cyber::cli {

namespace fs = std::filesystem;

struct SynthOptions {
    fs::path out;
    std::uint64_t seed = 0;
    int firms = 200;
    int months = 180;
    int kb_entries = 785;
    int blocks_per_filing = 5;
};

struct PrepOptions {
    fs::path knowledgebase, filings, out;
    std::optional<fs::path> stopwords, common_words;
    int common_limit = 100;
    int target_words = 40;
};

struct EmbedOptions {
    fs::path paragraphs, out;
    std::uint64_t seed = 0;
    int dim = 64;
    int epochs = 40;
    int negatives = 5;
    double learning_rate = 0.025;
    // 0 trains every paragraph jointly; >0 trains on the knowledgebase only
    // and infers filing paragraphs with this many passes.
    int infer_steps = 0;
};

struct ClusterOptions {
    fs::path paragraphs, vectors, out;
    std::uint64_t seed = 0;
    double low = 0.25, high = 0.85, high_value = 0.5;
    std::vector<int> kmeans_k{3, 4, 5};
    std::vector<int> spectral_egn{4, 6};
    int spectral_k = 4;
    bool reference_groups = false;  // score with the reference grouping instead of the selected row
};

struct ScoreOptions {
    fs::path paragraphs, vectors, super_tactics, out;
    std::optional<fs::path> returns, factors;
    double trim = 0.99;
    int idio_window = 60;
};

struct SortOptions {
    fs::path returns, scores, out;
    std::vector<int> bins{5, 20};
    std::string kind = "overall";
    std::string weighting = "quarter";  // quarter | monthly
    std::vector<std::string> double_sort{"beta", "book_to_market", "size"};
};

struct AlphasOptions {
    fs::path portfolios, factors, out;
    int hac_lags = -1;
};

struct FmOptions {
    fs::path returns, scores, factors, out;
    int window = 24;
    int bins = 20;
    std::string kind = "overall";
};

struct GrsOptions {
    fs::path portfolios, factors, out;
    std::optional<fs::path> cyber_portfolios;  // quintile file providing P5-P1
};

struct BgrsOptions {
    fs::path factors, out;
    std::optional<fs::path> cyber_portfolios;
    double prior = 1.25;
    std::string kmode = "original";
    bool expanding = true;
    int min_window = 36;
};

struct EventOptions {
    fs::path daily, calendar, event, formations, out;
};

struct WelchOptions {
    fs::path portfolios, out;
};

struct ReportOptions {
    fs::path data, out;
    std::uint64_t seed = 0;
    int infer_steps = 0;
    int epochs = 40;
    double prior = 1.25;
    std::string kmode = "original";
    int hac_lags = -1;
    bool include_amended = false;
};

void run_synth(const SynthOptions& o);
void run_prep(const PrepOptions& o);
void run_embed(const EmbedOptions& o);
void run_cluster(const ClusterOptions& o);
void run_score(const ScoreOptions& o);
void run_sort(const SortOptions& o);
void run_alphas(const AlphasOptions& o);
void run_fm(const FmOptions& o);
void run_grs(const GrsOptions& o);
void run_bgrs(const BgrsOptions& o);
void run_event(const EventOptions& o);
void run_welch(const WelchOptions& o);
void run_report(const ReportOptions& o);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view text);

}  // namespace cyber::cli
