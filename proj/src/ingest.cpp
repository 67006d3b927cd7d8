#include "cyberscore/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "cyberscore/cluster.hpp"

namespace cyber::ingest {

using json = nlohmann::json;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool is_separator_line(std::string_view line) {
    auto t = trim(line);
    return t.size() >= 3 && std::all_of(t.begin(), t.end(), [](char c) { return c == '-'; });
}

}  // namespace

Loaded<std::vector<EdgarIndexRow>> parse_edgar_index(std::istream& in, const EdgarOptions& options) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    std::size_t start = 0;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (is_separator_line(lines[i])) {
            start = i + 1;
            break;
        }

    Loaded<std::vector<EdgarIndexRow>> out;
    std::size_t parsed = 0;
    for (std::size_t i = start; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (trim(line).empty()) continue;
        auto f = split(line, '|');
        auto issue = [&](std::string msg) { out.issues.push_back({i + 1, std::move(msg)}); };
        if (f.size() != 5) {
            issue("expected 5 fields, found " + std::to_string(f.size()));
            continue;
        }
        if (!all_digits(f[0])) {
            issue("CIK is not a digit string: '" + f[0] + "'");
            continue;
        }
        EdgarIndexRow row;
        try {
            row.date_filed = Date::parse(f[3]);
        } catch (const std::exception&) {
            issue("unparseable date '" + f[3] + "'");
            continue;
        }
        if (f[4].empty()) {
            issue("empty filename");
            continue;
        }
        ++parsed;
        row.cik = f[0];
        row.company_name = f[1];
        row.form_type = f[2];
        row.filename = f[4];
        if (row.form_type == "10-K" || (options.include_amended && row.form_type == "10-K/A"))
            out.value.push_back(std::move(row));
    }
    if (parsed == 0) throw std::runtime_error("no parseable EDGAR index lines");
    return out;
}

std::string format_edgar_row(const EdgarIndexRow& row) {
    return row.cik + "|" + row.company_name + "|" + row.form_type + "|" + row.date_filed.iso() + "|" + row.filename;
}

std::vector<KnowledgebaseEntry> parse_knowledgebase(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("malformed knowledgebase JSON: ") + e.what());
    }
    if (!doc.is_array()) throw std::runtime_error("knowledgebase must be a JSON array");
    std::vector<KnowledgebaseEntry> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        auto where = "knowledgebase entry " + std::to_string(i);
        if (!e.is_object()) throw std::runtime_error(where + " is not an object");
        auto field = [&](const char* name) {
            if (!e.contains(name) || !e[name].is_string())
                throw std::runtime_error(where + " lacks string field '" + name + "'");
            return e[name].get<std::string>();
        };
        KnowledgebaseEntry k{field("tactic"), field("technique"), field("sub_technique"), field("description")};
        where += " (" + k.technique + " / " + k.sub_technique + ")";
        if (!cluster::is_tactic(k.tactic)) throw std::runtime_error(where + " has unknown tactic '" + k.tactic + "'");
        if (trim(k.description).empty()) throw std::runtime_error(where + " has an empty description");
        out.push_back(std::move(k));
    }
    if (out.empty()) throw std::runtime_error("knowledgebase is empty");
    return out;
}

std::vector<KnowledgebaseEntry> load_knowledgebase(const fs::path& path) { return parse_knowledgebase(read_text(path)); }

void save_knowledgebase(const fs::path& path, const std::vector<KnowledgebaseEntry>& entries) {
    json doc = json::array();
    for (const auto& e : entries)
        doc.push_back({{"tactic", e.tactic},
                       {"technique", e.technique},
                       {"sub_technique", e.sub_technique},
                       {"description", e.description}});
    auto out = open_out(path);
    out << doc.dump(1) << '\n';
}

SicMap::SicMap(std::vector<SicRange> ranges) : ranges_(std::move(ranges)) {
    std::vector<const SicRange*> sorted;
    for (const auto& r : ranges_) {
        if (r.lo > r.hi)
            throw std::invalid_argument("inverted SIC range " + std::to_string(r.lo) + "-" + std::to_string(r.hi));
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->lo < b->lo; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->lo <= sorted[i - 1]->hi)
            throw std::invalid_argument("overlapping SIC ranges " + std::to_string(sorted[i - 1]->lo) + "-" +
                                        std::to_string(sorted[i - 1]->hi) + " and " + std::to_string(sorted[i]->lo) +
                                        "-" + std::to_string(sorted[i]->hi));
}

SicMap SicMap::load(const fs::path& path) {
    auto t = read_delimited(path);
    auto lo = t.column("lo"), hi = t.column("hi"), ind = t.column("industry");
    std::vector<SicRange> ranges;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        try {
            ranges.push_back({std::stoi(r.at(lo)), std::stoi(r.at(hi)), std::string(trim(r.at(ind)))});
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(t.line_numbers[i]) + ": bad SIC range row");
        }
    }
    return SicMap(std::move(ranges));
}

std::string SicMap::industry_of(int sic) const {
    for (const auto& r : ranges_)
        if (sic >= r.lo && sic <= r.hi) return r.industry;
    return "Other";
}

namespace {

template <typename Fn>
void for_rows(const CsvTable& t, std::vector<RowIssue>& issues, Fn&& fn) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row.size() != t.header.size()) {
            issues.push_back({t.line_numbers[i], "expected " + std::to_string(t.header.size()) + " fields, found " +
                                                     std::to_string(row.size())});
            continue;
        }
        try {
            fn(row);
        } catch (const std::exception& e) {
            issues.push_back({t.line_numbers[i], e.what()});
        }
    }
}

}  // namespace

Loaded<ScorePanel> load_scores(const fs::path& path) {
    auto t = read_delimited(path);
    auto fi = t.column("firm_id"), d = t.column("filing_date"), k = t.column("score_kind"), v = t.column("value");
    Loaded<ScorePanel> out;
    for_rows(t, out.issues, [&](const auto& r) {
        out.value.add({r[fi], Date::parse(r[d]), r[k], parse_double(r[v])});
    });
    return out;
}

void write_scores(std::ostream& out, const ScorePanel& panel, std::string_view provenance) {
    TableWriter w({"firm_id", "filing_date", "score_kind", "value"});
    for (const auto& r : panel.rows()) w.add_row({r.firm_id, r.filing_date.iso(), r.kind, format_double(r.value)});
    w.write(out, provenance);
}

Loaded<ReturnsPanel> load_returns(const fs::path& path) {
    auto t = read_delimited(path);
    auto a = t.column("asset_id"), m = t.column("month"), r = t.column("excess_return"), c = t.column("market_cap");
    std::vector<std::pair<std::size_t, std::string>> extra;
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (j != a && j != m && j != r && j != c) extra.emplace_back(j, t.header[j]);
    Loaded<ReturnsPanel> out;
    for_rows(t, out.issues, [&](const auto& row) {
        ReturnObservation o;
        o.asset_id = row[a];
        o.month = YearMonth::parse(row[m]);
        o.excess_return = parse_double(row[r]);
        if (!trim(row[c]).empty()) o.market_cap = parse_double(row[c]);
        for (const auto& [j, name] : extra)
            if (!trim(row[j]).empty()) o.characteristics[name] = parse_double(row[j]);
        out.value.add(std::move(o));
    });
    return out;
}

FactorPanel load_factors(const fs::path& path) {
    auto t = read_delimited(path);
    auto m = t.column("month");
    std::optional<std::size_t> rf;
    FactorPanel p;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        std::string name = t.header[j];
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (j == m) continue;
        if (name == "rf") {
            rf = j;
            continue;
        }
        p.names.push_back(name);
        cols.push_back(j);
    }
    std::vector<std::pair<YearMonth, std::size_t>> order;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.rows[i].size() != t.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(t.line_numbers[i]) + ": ragged row");
        order.emplace_back(YearMonth::parse(t.rows[i][m]), i);
    }
    std::sort(order.begin(), order.end());
    p.values.resize(static_cast<Eigen::Index>(order.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& row = t.rows[order[i].second];
        p.months.push_back(order[i].first);
        for (std::size_t j = 0; j < cols.size(); ++j)
            p.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(row[cols[j]]);
        if (rf) p.rf.push_back(parse_double(row[*rf]));
    }
    p.validate();
    return p;
}

Loaded<DailyReturns> load_daily(const fs::path& path) {
    auto t = read_delimited(path);
    auto a = t.column("asset_id"), d = t.column("date"), r = t.column("return");
    Loaded<DailyReturns> out;
    for_rows(t, out.issues, [&](const auto& row) { out.value.add(row[a], Date::parse(row[d]), parse_double(row[r])); });
    return out;
}

std::vector<Date> load_calendar(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<Date> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        try {
            out.push_back(Date::parse(t));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad date '" + std::string(t) + "'");
        }
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw std::runtime_error("duplicate trading day in " + path.string());
    return out;
}

EventConfig parse_event_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("malformed event config: ") + e.what());
    }
    EventConfig c;
    if (!doc.contains("event_date")) throw std::runtime_error("event config lacks event_date");
    c.event_date = Date::parse(doc.at("event_date").get<std::string>());
    if (doc.contains("estimation_days")) c.estimation_days = doc.at("estimation_days").get<int>();
    if (!doc.contains("windows") || !doc["windows"].is_array() || doc["windows"].empty())
        throw std::runtime_error("event config needs a nonempty windows list");
    for (const auto& w : doc["windows"]) {
        if (!w.is_array() || w.size() != 2) throw std::runtime_error("each window is a [start, end] pair");
        c.windows.push_back({w[0].get<int>(), w[1].get<int>()});
    }
    return c;
}

EventConfig load_event_config(const fs::path& path) { return parse_event_config(read_text(path)); }

Loaded<std::vector<FilingText>> load_filings(const fs::path& path) {
    std::istringstream in(read_text(path));
    Loaded<std::vector<FilingText>> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            out.value.push_back({j.at("firm_id").get<std::string>(), Date::parse(j.at("filing_date").get<std::string>()),
                                 j.at("text").get<std::string>()});
        } catch (const std::exception& e) {
            out.issues.push_back({lineno, std::string("bad filing record: ") + e.what()});
        }
    }
    return out;
}

void save_filings(const fs::path& path, const std::vector<FilingText>& filings) {
    auto out = open_out(path);
    for (const auto& f : filings)
        out << json{{"firm_id", f.firm_id}, {"filing_date", f.filing_date.iso()}, {"text", f.text}}.dump() << '\n';
}

std::vector<ParagraphRecord> load_paragraphs(const fs::path& path) {
    auto t = read_delimited(path, '\t');
    auto d = t.column("doc_id"), ix = t.column("index"), s = t.column("source"), l = t.column("label"),
         dt = t.column("date"), tk = t.column("tokens");
    std::vector<ParagraphRecord> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        auto row = t.rows[i];
        row.resize(t.header.size());  // an empty trailing field may be cut
        ParagraphRecord r;
        r.paragraph.doc_id = row[d];
        try {
            r.paragraph.index = static_cast<std::size_t>(std::stoul(row[ix]));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(t.line_numbers[i]) + ": bad paragraph index");
        }
        r.source = row[s];
        r.label = row[l];
        r.date = row[dt];
        for (auto& tok : split(row[tk], ' '))
            if (!tok.empty()) r.paragraph.tokens.push_back(std::move(tok));
        out.push_back(std::move(r));
    }
    return out;
}

void save_paragraphs(const fs::path& path, const std::vector<ParagraphRecord>& records, std::string_view provenance) {
    TableWriter w({"doc_id", "index", "source", "label", "date", "tokens"});
    for (const auto& r : records) {
        std::string toks;
        for (const auto& t : r.paragraph.tokens) {
            if (!toks.empty()) toks += ' ';
            toks += t;
        }
        w.add_row({r.paragraph.doc_id, std::to_string(r.paragraph.index), r.source, r.label, r.date, toks});
    }
    w.write(path, provenance, '\t');
}

}  // namespace cyber::ingest
