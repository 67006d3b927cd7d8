#include "cyberscore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "cyberscore/cluster.hpp"
#include "cyberscore/rng.hpp"
#include "cyberscore/score.hpp"
#include "cyberscore/table.hpp"
#include "cyberscore/textprep.hpp"

namespace cyber::synth {

namespace {

constexpr std::uint64_t kWordsSalt = 11, kKbSalt = 12, kFirmSalt = 13, kFilingSalt = 14, kReturnSalt = 15,
                        kFactorSalt = 16, kDailySalt = 17;

class WordFactory {
public:
    explicit WordFactory(std::uint64_t seed) : rng_(seed) {
        for (const auto& w : textprep::default_stopwords()) used_.insert(w);
        for (const auto& w : score::default_risk_dictionary()) used_.insert(w);
    }

    std::string make() {
        static constexpr const char* onsets[] = {"b", "c", "d", "f", "g", "k", "l", "m", "n", "p",
                                                 "r", "s", "t", "v", "z", "br", "st", "tr", "pl", "gr"};
        static constexpr const char* vowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
        static constexpr const char* codas[] = {"", "", "n", "r", "s", "x", "l"};
        for (;;) {
            std::string w;
            std::size_t syl = 2 + rng_.below(2);
            for (std::size_t i = 0; i < syl; ++i) {
                w += onsets[rng_.below(std::size(onsets))];
                w += vowels[rng_.below(std::size(vowels))];
            }
            w += codas[rng_.below(std::size(codas))];
            if (used_.insert(w).second) return w;
        }
    }

    std::vector<std::string> make(std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(make());
        return out;
    }

private:
    Rng rng_;
    std::set<std::string> used_;
};

// Zipf-like sampler over a ranked word list.
class RankedSampler {
public:
    explicit RankedSampler(std::size_t n, double s = 1.0) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) cdf_.push_back(acc += 1.0 / std::pow(static_cast<double>(i + 1), s));
        for (double& c : cdf_) c /= acc;
    }
    std::size_t draw(Rng& rng) const {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), rng.uniform());
        return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    }

private:
    std::vector<double> cdf_;
};

struct Vocabulary {
    std::vector<std::string> generic;
    std::map<std::string, std::vector<std::string>> topic;  // tactic -> words
    std::map<std::string, std::vector<std::string>> shared;  // super-tactic -> words
    std::vector<std::string> risk;
    std::vector<std::string> glue{"the", "and", "of", "our", "we", "to", "in", "may", "be", "could"};
};

Vocabulary make_vocabulary(std::uint64_t seed) {
    WordFactory f(mix_seed(seed, kWordsSalt));
    Vocabulary v;
    v.generic = f.make(300);
    for (const auto& t : cluster::kTactics) v.topic[std::string(t)] = f.make(15);
    std::set<std::string> groups;
    for (const auto& [_, g] : cluster::reference_super_tactics()) groups.insert(g);
    for (const auto& g : groups) v.shared[g] = f.make(20);
    v.risk.assign(score::default_risk_dictionary().begin(), score::default_risk_dictionary().end());
    return v;
}

std::string sentence(std::vector<std::string> words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out + ".";
}

// A block of four sentences. `tactic` empty means generic business prose.
std::string block(const Vocabulary& v, const RankedSampler& generic_rank, Rng& rng, const std::string& tactic,
                  double risk_prob) {
    const auto& groups = cluster::reference_super_tactics();
    std::string out;
    bool risky = rng.uniform() < risk_prob;
    for (int s = 0; s < 4; ++s) {
        std::vector<std::string> words;
        for (int i = 0; i < 13; ++i) {
            double u = rng.uniform();
            if (u < 0.2) {
                words.push_back(v.glue[rng.below(v.glue.size())]);
                continue;
            }
            if (!tactic.empty()) {
                double c = rng.uniform();
                if (c < 0.45) {
                    const auto& t = v.topic.at(tactic);
                    words.push_back(t[rng.below(t.size())]);
                    continue;
                }
                if (c < 0.65) {
                    const auto& g = v.shared.at(groups.at(tactic));
                    words.push_back(g[rng.below(g.size())]);
                    continue;
                }
            }
            words.push_back(v.generic[generic_rank.draw(rng)]);
        }
        if (risky && s == 1) words.insert(words.begin() + 3, v.risk[rng.below(v.risk.size())]);
        if (!out.empty()) out += ' ';
        out += sentence(std::move(words));
    }
    return out;
}

std::string pad(int value, int width) {
    std::string s = std::to_string(value);
    return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

SynthData generate(const SynthConfig& config) {
    if (config.n_firms < 20) throw std::invalid_argument("synthetic world needs at least 20 firms");
    if (config.n_months < 36) throw std::invalid_argument("synthetic world needs at least 36 months");
    if (config.kb_entries < 14) throw std::invalid_argument("knowledgebase needs at least one entry per tactic");
    SynthData d;
    d.config = config;
    const Vocabulary v = make_vocabulary(config.seed);
    d.topic_words = v.topic;
    const RankedSampler generic_rank(v.generic.size());
    d.common_words.assign(v.generic.begin(), v.generic.begin() + 100);

    // Knowledgebase: entries spread over the 14 tactics.
    {
        Rng rng(mix_seed(config.seed, kKbSalt));
        for (int i = 0; i < config.kb_entries; ++i) {
            std::string tactic(cluster::kTactics[static_cast<std::size_t>(i) % cluster::kTactics.size()]);
            ingest::KnowledgebaseEntry e;
            e.tactic = tactic;
            e.technique = "T" + pad(1000 + i / 4, 4);
            e.sub_technique = e.technique + "." + pad(i % 4 + 1, 3);
            e.description = block(v, generic_rank, rng, tactic, 0.2);
            d.knowledgebase.push_back(std::move(e));
        }
    }

    // Firms.
    {
        Rng rng(mix_seed(config.seed, kFirmSalt));
        d.sic_ranges = {{100, 999, "Consumer Nondurables"}, {2000, 2399, "Consumer Nondurables"},
                        {2800, 2829, "Chemicals"},          {3570, 3579, "Business Equipment"},
                        {3660, 3692, "Business Equipment"}, {4800, 4899, "Telecom"},
                        {4900, 4949, "Utilities"},          {5000, 5999, "Shops"},
                        {6000, 6999, "Money"},              {7370, 7379, "Business Equipment"},
                        {8000, 8099, "Healthcare"}};
        const int last = config.first_month.index() + config.n_months - 1;
        for (int i = 0; i < config.n_firms; ++i) {
            FirmInfo f;
            f.firm_id = "F" + pad(i + 1, 4);
            f.cik = std::to_string(100000 + 37 * i);
            f.company = "SYNTHETIC CORP " + pad(i + 1, 4);
            if (rng.uniform() < 0.9) {
                const auto& r = d.sic_ranges[rng.below(d.sic_ranges.size())];
                f.sic = r.lo + static_cast<int>(rng.below(static_cast<std::size_t>(r.hi - r.lo + 1)));
            } else {
                f.sic = 9100 + static_cast<int>(rng.below(800));  // unmatched on purpose
            }
            f.exposure = rng.uniform();
            f.beta = rng.uniform(0.6, 1.4);
            if (rng.uniform() < config.delist_share) {
                int half = config.n_months / 2;
                f.delisted = YearMonth::from_index(last - static_cast<int>(rng.below(static_cast<std::size_t>(half))));
            }
            d.firms.push_back(std::move(f));
        }
    }

    // Filings: one per firm-year, filed February to April.
    {
        const int first_year = config.first_month.year;
        const int last_year = YearMonth::from_index(config.first_month.index() + config.n_months - 1).year;
        for (std::size_t i = 0; i < d.firms.size(); ++i) {
            const auto& f = d.firms[i];
            Rng rng(mix_seed(config.seed, kFilingSalt * 1000 + i));
            const double cyber_prob = 0.1 + 0.6 * f.exposure;
            for (int y = first_year; y <= last_year; ++y) {
                Date date{y, 2 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(28))};
                if (f.delisted && date.year_month() > *f.delisted) break;
                std::string text;
                for (int b = 0; b < config.blocks_per_filing; ++b) {
                    std::string tactic;
                    if (rng.uniform() < cyber_prob)
                        tactic = std::string(cluster::kTactics[rng.below(cluster::kTactics.size())]);
                    if (!text.empty()) text += ' ';
                    text += block(v, generic_rank, rng, tactic, tactic.empty() ? 0.3 : 0.6);
                }
                d.filings.push_back({f.firm_id, date, std::move(text)});
            }
        }
    }

    // Factors.
    Rng frng(mix_seed(config.seed, kFactorSalt));
    d.factors.names = {"mkt", "smb", "hml", "umd", "rmw", "cma"};
    const double means[] = {0.007, 0.002, 0.002, 0.005, 0.003, 0.002};
    const double sds[] = {0.045, 0.03, 0.03, 0.04, 0.02, 0.02};
    d.factors.values.resize(config.n_months, 6);
    for (int t = 0; t < config.n_months; ++t) {
        d.factors.months.push_back(config.first_month.plus(t));
        for (int k = 0; k < 6; ++k) d.factors.values(t, k) = frng.normal(means[k], sds[k]);
        d.factors.rf.push_back(0.001);
    }

    // Monthly returns.
    for (std::size_t i = 0; i < d.firms.size(); ++i) {
        const auto& f = d.firms[i];
        Rng rng(mix_seed(config.seed, kReturnSalt * 1000 + i));
        const double s = rng.normal(0.0, 0.5), h = rng.normal(0.0, 0.5), idio = rng.uniform(0.04, 0.10);
        double cap = std::exp(rng.normal(7.0, 1.5));
        double btm = std::exp(rng.normal(-0.5, 0.5));
        for (int t = 0; t < config.n_months; ++t) {
            YearMonth m = config.first_month.plus(t);
            if (f.delisted && m > *f.delisted) break;
            double r = config.premium * f.exposure + f.beta * d.factors.values(t, 0) + s * d.factors.values(t, 1) +
                       h * d.factors.values(t, 2) + rng.normal(0.0, idio);
            r = std::max(r, -0.95);
            cap *= 1.0 + r + d.factors.rf[static_cast<std::size_t>(t)];
            btm *= std::exp(rng.normal(0.0, 0.03));
            ReturnObservation o;
            o.asset_id = f.firm_id;
            o.month = m;
            o.excess_return = r;
            o.market_cap = cap;
            o.characteristics = {{"beta", f.beta}, {"book_to_market", btm}, {"size", std::log(cap)}};
            d.returns.push_back(std::move(o));
        }
    }

    // Daily returns on a weekday calendar ending with the sample.
    {
        YearMonth last = config.first_month.plus(config.n_months - 1);
        Date end{last.year, last.month, days_in_month(last.year, last.month)};
        Date start{end.year - 1, 1, 2};
        // Day-of-week via Zeller-free counting from a known Monday (2000-01-03).
        auto ordinal = [](Date x) {
            int y = x.year, m = x.month;
            if (m <= 2) {
                y -= 1;
                m += 12;
            }
            return 365L * y + y / 4 - y / 100 + y / 400 + (153 * (m - 3) + 2) / 5 + x.day;
        };
        const long monday = ordinal({2000, 1, 3});
        for (Date x = start; x <= end;) {
            long dow = ((ordinal(x) - monday) % 7 + 7) % 7;  // 0 = Monday
            if (dow < 5) d.calendar.push_back(x);
            if (++x.day > days_in_month(x.year, x.month)) {
                x.day = 1;
                if (++x.month > 12) {
                    x.month = 1;
                    ++x.year;
                }
            }
        }
        Rng rng(mix_seed(config.seed, kDailySalt));
        std::map<Date, double> mkt;
        for (Date x : d.calendar) mkt[x] = rng.normal(0.0004, 0.01);
        for (const auto& [x, r] : mkt) d.daily.add("MKT", x, r);
        auto ev = std::find(d.calendar.begin(), d.calendar.end(), config.event_date);
        for (std::size_t i = 0; i < d.firms.size(); ++i) {
            const auto& f = d.firms[i];
            for (std::size_t k = 0; k < d.calendar.size(); ++k) {
                Date x = d.calendar[k];
                if (f.delisted && x.year_month() > *f.delisted) break;
                double r = 0.0001 + f.beta * mkt[x] + rng.normal(0.0, 0.02);
                if (ev != d.calendar.end() && f.exposure > 0.5) {
                    auto e = static_cast<std::size_t>(ev - d.calendar.begin());
                    if (k == e) r += config.event_shock;
                    if (k == e + 1) r += config.event_shock / 2.0;
                }
                d.daily.add(f.firm_id, x, r);
            }
        }
    }

    // EDGAR index sample: every filing as a 10-K plus distractors.
    {
        d.edgar_lines = {"Description:           Master Index of EDGAR Dissemination Feed",
                         "Comments:              synthetic sample", "",
                         "CIK|Company Name|Form Type|Date Filed|Filename",
                         "--------------------------------------------------------------------------------"};
        std::map<std::string, const FirmInfo*> by_id;
        for (const auto& f : d.firms) by_id[f.firm_id] = &f;
        std::size_t n = 0;
        for (const auto& fl : d.filings) {
            const auto* f = by_id.at(fl.firm_id);
            std::string acc = f->cik + "-" + std::to_string(fl.filing_date.year) + "-" + pad(static_cast<int>(++n), 6);
            d.edgar_lines.push_back(f->cik + "|" + f->company + "|10-K|" + fl.filing_date.iso() + "|edgar/data/" +
                                    f->cik + "/" + acc + ".txt");
            if (n % 7 == 0)
                d.edgar_lines.push_back(f->cik + "|" + f->company + "|10-Q|" + fl.filing_date.iso() + "|edgar/data/" +
                                        f->cik + "/" + acc + "-q.txt");
            if (n % 97 == 0)
                d.edgar_lines.push_back(f->cik + "|" + f->company + "|10-K/A|" + fl.filing_date.iso() +
                                        "|edgar/data/" + f->cik + "/" + acc + "-a.txt");
        }
        d.edgar_lines.push_back("123|MALFORMED LINE|10-K|2020-01-01");
    }
    return d;
}

void write(const std::filesystem::path& dir, const SynthData& d) {
    namespace fs = std::filesystem;
    using json = nlohmann::json;
    fs::create_directories(dir);
    const auto& c = d.config;

    ingest::save_knowledgebase(dir / "knowledgebase.json", d.knowledgebase);
    ingest::save_filings(dir / "filings.jsonl", d.filings);

    {
        std::ofstream out(dir / "common_words.txt", std::ios::binary);
        for (const auto& w : d.common_words) out << w << '\n';
    }
    {
        TableWriter w({"firm_id", "cik", "company", "sic"});
        for (const auto& f : d.firms) w.add_row({f.firm_id, f.cik, f.company, std::to_string(f.sic)});
        w.write(dir / "firms.csv");
    }
    {
        TableWriter w({"lo", "hi", "industry"});
        for (const auto& r : d.sic_ranges) w.add_row({std::to_string(r.lo), std::to_string(r.hi), r.industry});
        w.write(dir / "sic_ranges.csv");
    }
    {
        TableWriter w({"asset_id", "month", "excess_return", "market_cap", "beta", "book_to_market", "size"});
        for (const auto& o : d.returns)
            w.add_row({o.asset_id, o.month.iso(), format_double(o.excess_return), format_double(o.market_cap),
                       format_double(o.characteristics.at("beta")), format_double(o.characteristics.at("book_to_market")),
                       format_double(o.characteristics.at("size"))});
        w.write(dir / "returns.csv");
    }
    {
        std::vector<std::string> header{"month"};
        header.insert(header.end(), d.factors.names.begin(), d.factors.names.end());
        header.push_back("rf");
        TableWriter w(header);
        for (std::size_t t = 0; t < d.factors.months.size(); ++t) {
            std::vector<std::string> row{d.factors.months[t].iso()};
            for (Eigen::Index k = 0; k < d.factors.values.cols(); ++k)
                row.push_back(format_double(d.factors.values(static_cast<Eigen::Index>(t), k)));
            row.push_back(format_double(d.factors.rf[t]));
            w.add_row(std::move(row));
        }
        w.write(dir / "factors.csv");
    }
    {
        TableWriter w({"asset_id", "date", "return"});
        for (const auto& [asset, series] : d.daily.series)
            for (const auto& [date, r] : series) w.add_row({asset, date.iso(), format_double(r)});
        w.write(dir / "daily.csv");
    }
    {
        std::ofstream out(dir / "calendar.txt", std::ios::binary);
        for (Date x : d.calendar) out << x.iso() << '\n';
    }
    {
        json ev{{"event_date", c.event_date.iso()},
                {"windows", json::array({json::array({-1, 1}), json::array({-1, 3})})},
                {"estimation_days", 252}};
        std::ofstream out(dir / "event.json", std::ios::binary);
        out << ev.dump(1) << '\n';
    }
    {
        std::ofstream out(dir / "edgar_index.idx", std::ios::binary);
        for (const auto& l : d.edgar_lines) out << l << '\n';
    }
    {
        json firms = json::object();
        json delisted = json::object();
        for (const auto& f : d.firms) {
            firms[f.firm_id] = {{"exposure", f.exposure}, {"beta", f.beta}};
            if (f.delisted) delisted[f.firm_id] = f.delisted->iso();
        }
        json topics = json::object();
        for (const auto& [t, words] : d.topic_words) topics[t] = words;
        json groups = json::object();
        for (const auto& [t, g] : cluster::reference_super_tactics()) groups[t] = g;
        json m{{"seed", c.seed},
               {"n_firms", c.n_firms},
               {"first_month", c.first_month.iso()},
               {"n_months", c.n_months},
               {"kb_entries", c.kb_entries},
               {"planted",
                {{"monthly_premium_per_unit_exposure", c.premium},
                 {"event_date", c.event_date.iso()},
                 {"event_shock_t0", c.event_shock},
                 {"event_shock_t1", c.event_shock / 2.0},
                 {"event_shock_applies_to", "exposure > 0.5"},
                 {"super_tactics", groups},
                 {"firms", firms},
                 {"delisted_last_month", delisted}}},
               {"topic_words", topics}};
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        out << m.dump(1) << '\n';
    }
}

}  // namespace cyber::synth
