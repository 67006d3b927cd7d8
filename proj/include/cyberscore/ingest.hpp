// Loaders and writers for every file the pipeline exchanges.
//
// Structural problems (missing file, missing column, malformed JSON) throw.
// Row-level problems are collected as RowIssue entries and the row is
// skipped.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cyberscore/dates.hpp"
#include "cyberscore/events.hpp"
#include "cyberscore/panel.hpp"
#include "cyberscore/table.hpp"
#include "cyberscore/textprep.hpp"

namespace cyber::ingest {

namespace fs = std::filesystem;

template <typename T>
struct Loaded {
    T value;
    std::vector<RowIssue> issues;
};

// ---- EDGAR full index ------------------------------------------------------

struct EdgarIndexRow {
    std::string cik;
    std::string company_name;
    std::string form_type;
    Date date_filed;
    std::string filename;
};

struct EdgarOptions {
    bool include_amended = false;  // keep "10-K/A" as well
};

// Lines before a row of dashes are treated as the index preamble. Throws when
// no line parses at all.
Loaded<std::vector<EdgarIndexRow>> parse_edgar_index(std::istream& in, const EdgarOptions& options = {});
std::string format_edgar_row(const EdgarIndexRow& row);

// ---- knowledgebase ---------------------------------------------------------

struct KnowledgebaseEntry {
    std::string tactic;
    std::string technique;
    std::string sub_technique;
    std::string description;
};

std::vector<KnowledgebaseEntry> parse_knowledgebase(std::string_view json_text);
std::vector<KnowledgebaseEntry> load_knowledgebase(const fs::path& path);
void save_knowledgebase(const fs::path& path, const std::vector<KnowledgebaseEntry>& entries);

// ---- SIC to industry -------------------------------------------------------

struct SicRange {
    int lo = 0;
    int hi = 0;
    std::string industry;
};

class SicMap {
public:
    // Throws on inverted or overlapping ranges.
    explicit SicMap(std::vector<SicRange> ranges);
    static SicMap load(const fs::path& path);  // columns lo, hi, industry

    std::string industry_of(int sic) const;  // "Other" when unmatched
    const std::vector<SicRange>& ranges() const { return ranges_; }

private:
    std::vector<SicRange> ranges_;
};

// ---- panels ----------------------------------------------------------------

Loaded<ScorePanel> load_scores(const fs::path& path);
void write_scores(std::ostream& out, const ScorePanel& panel, std::string_view provenance = {});

// Columns asset_id, month, excess_return, market_cap; any other numeric
// column becomes a named characteristic. An empty market_cap means unknown.
Loaded<ReturnsPanel> load_returns(const fs::path& path);

// Columns month, one per factor, optional rf. Names are lowercased.
FactorPanel load_factors(const fs::path& path);

// Columns asset_id, date, return.
Loaded<DailyReturns> load_daily(const fs::path& path);

// One ISO date per line; sorted and checked for duplicates.
std::vector<Date> load_calendar(const fs::path& path);

struct EventConfig {
    Date event_date;
    std::vector<events::EventWindow> windows;
    int estimation_days = events::kDefaultEstimationDays;
};

EventConfig parse_event_config(std::string_view json_text);
EventConfig load_event_config(const fs::path& path);

// ---- text --------------------------------------------------------------------

struct FilingText {
    std::string firm_id;
    Date filing_date;
    std::string text;
};

// One JSON object per line with firm_id, filing_date, text.
Loaded<std::vector<FilingText>> load_filings(const fs::path& path);
void save_filings(const fs::path& path, const std::vector<FilingText>& filings);

// Preprocessed paragraphs with their origin. `label` is the tactic for
// knowledgebase paragraphs and the firm id for filing paragraphs.
struct ParagraphRecord {
    textprep::Paragraph paragraph;
    std::string source;  // "kb" or "filing"
    std::string label;
    std::string date;    // filing date, empty for kb
};

std::vector<ParagraphRecord> load_paragraphs(const fs::path& path);
void save_paragraphs(const fs::path& path, const std::vector<ParagraphRecord>& records,
                     std::string_view provenance = {});

std::string read_text(const fs::path& path);

}  // namespace cyber::ingest
