// Synthetic world generator.
//
// Produces a knowledgebase, annual filings whose cyber content is driven by
// a latent firm exposure, monthly returns carrying a premium on that same
// exposure, factor returns, daily returns with an event shock, an EDGAR index
// sample and an SIC map. The planted quantities are written to a manifest so
// tests can check recovery.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cyberscore/dates.hpp"
#include "cyberscore/ingest.hpp"

namespace cyber::synth {

struct SynthConfig {
    std::uint64_t seed = 1;
    int n_firms = 200;
    YearMonth first_month{2009, 1};
    int n_months = 180;
    int kb_entries = 785;
    int blocks_per_filing = 5;       // ~40-token paragraphs per filing
    double premium = 0.004;          // monthly excess return per unit exposure
    Date event_date{2023, 6, 12};    // a Monday
    double event_shock = -0.01;      // t = 0 abnormal return of exposed firms
    double delist_share = 0.05;
};

struct FirmInfo {
    std::string firm_id;
    std::string cik;
    std::string company;
    int sic = 0;
    double exposure = 0.0;
    double beta = 1.0;
    std::optional<YearMonth> delisted;  // last month with a return
};

struct SynthData {
    SynthConfig config;
    std::vector<ingest::KnowledgebaseEntry> knowledgebase;
    std::vector<ingest::FilingText> filings;
    std::vector<FirmInfo> firms;
    std::vector<ReturnObservation> returns;
    FactorPanel factors;
    DailyReturns daily;
    std::vector<Date> calendar;
    std::vector<std::string> edgar_lines;
    std::vector<ingest::SicRange> sic_ranges;
    std::vector<std::string> common_words;
    std::map<std::string, std::vector<std::string>> topic_words;  // tactic -> words
};

SynthData generate(const SynthConfig& config);

// Writes every input file plus manifest.json into `dir` (created if needed).
void write(const std::filesystem::path& dir, const SynthData& data);

}  // namespace cyber::synth
