// Acceptance harness: one PASS/FAIL line per criterion.
//
// usage: acceptance <path-to-cyberscore> <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cyberscore/cluster.hpp"
#include "cyberscore/events.hpp"
#include "cyberscore/portfolio.hpp"
#include "cyberscore/pricing.hpp"
#include "cyberscore/rng.hpp"
#include "cyberscore/score.hpp"
#include "cyberscore/stats.hpp"
#include "support.hpp"

using namespace cyber;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED " + what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ==== AC1 clustering recovery =================================================

// Nodes carry a block direction plus noise confined to private dimensions,
// which keeps within-block cosines high and cross-block cosines near zero.
testing::Planted block_vectors(Rng& rng, int blocks, int size) {
    const int priv = 100;
    const double s = std::sqrt(0.15 / priv);
    testing::Planted p;
    p.points = Eigen::MatrixXd::Zero(blocks * size, blocks + priv);
    for (int b = 0; b < blocks; ++b)
        for (int i = 0; i < size; ++i) {
            const int row = b * size + i;
            p.points(row, b) = 1.0;
            for (int d = 0; d < priv; ++d) p.points(row, blocks + d) = s * rng.normal();
            p.truth.push_back(b);
        }
    return p;
}

Outcome ac1() {
    Outcome o;
    const int seeds = 50, blocks = 4, size = 30;
    std::map<std::string, int> good;
    double min_within = 1.0, max_across = -1.0;
    auto t0 = Clock::now();
    for (int s = 0; s < seeds; ++s) {
        Rng rng(mix_seed(1001, static_cast<std::uint64_t>(s)));
        auto p = block_vectors(rng, blocks, size);
        Eigen::MatrixXd cos = testing::cosine_matrix(p.points);
        for (int i = 0; i < blocks * size; ++i)
            for (int j = i + 1; j < blocks * size; ++j) {
                if (p.truth[static_cast<std::size_t>(i)] == p.truth[static_cast<std::size_t>(j)])
                    min_within = std::min(min_within, cos(i, j));
                else
                    max_across = std::max(max_across, cos(i, j));
            }
        cluster::SimilarityMatrix sim{cos, std::vector<std::string>(static_cast<std::size_t>(blocks * size), "Impact")};
        auto graph = cluster::apply_thresholds(sim, 0.25, 1.0, 1.0);
        const auto seed = static_cast<std::uint64_t>(s);
        std::map<std::string, cluster::ClusterAssignment> found{
            {"kmeans", cluster::spherical_kmeans(p.points, blocks, seed)},
            {"louvain", cluster::louvain(graph, seed)},
            {"spectral_egn4", cluster::spectral_cluster(graph, blocks, 4, seed)},
            {"spectral_egn6", cluster::spectral_cluster(graph, blocks, 6, seed)},
        };
        for (const auto& [name, a] : found) {
            const bool hit = a.k == blocks && testing::label_agreement(p.truth, a.labels, blocks) >= 0.95;
            good[name] += hit ? 1 : 0;
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(min_within >= 0.7 && max_across <= 0.2, "planted cosine bounds");
    for (const auto& [name, n] : good) {
        o.require(n >= static_cast<int>(std::ceil(0.95 * seeds)), name + " recovery");
        o.note(name + " " + std::to_string(n) + "/" + std::to_string(seeds));
    }
    o.require(elapsed < 5.0, "runtime < 5 s");
    o.note("within>=" + fmt("%.3f", min_within) + " across<=" + fmt("%.3f", max_across) + " " + fmt("%.2fs", elapsed));
    return o;
}

// ==== AC2 entropy and balance =================================================

Outcome ac2() {
    Outcome o;
    std::vector<std::string> labels;
    std::vector<int> pure, spread;
    for (std::size_t t = 0; t < 14; ++t)
        for (int i = 0; i < 4; ++i) {
            labels.emplace_back(cluster::kTactics[t]);
            pure.push_back(static_cast<int>(t % 4));
            spread.push_back(i);
        }
    const double e_pure = cluster::entropy_sum(cluster::canonicalize(pure), labels);
    const double e_spread = cluster::entropy_sum(cluster::canonicalize(spread), labels);
    o.require(e_pure == 0.0, "pure partition entropy exactly 0");
    o.require(std::abs(e_spread - 14.0 * std::log(4.0)) < 1e-9, "uniform 4-way spread = 14 ln 4");
    o.require(cluster::balanced_score(cluster::canonicalize(spread)) == 0.0, "equal-count balance 0");

    Rng rng(2002);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<std::string> lab;
        std::vector<int> cl;
        const int n = 20 + static_cast<int>(rng.below(200));
        for (int i = 0; i < n; ++i) {
            lab.emplace_back(cluster::kTactics[rng.below(14)]);
            cl.push_back(static_cast<int>(rng.below(6)));
        }
        auto a = cluster::canonicalize(cl);
        std::map<std::string, std::map<int, double>> counts;
        std::map<int, double> sizes;
        for (int i = 0; i < n; ++i) {
            counts[lab[static_cast<std::size_t>(i)]][a.labels[static_cast<std::size_t>(i)]] += 1;
            sizes[a.labels[static_cast<std::size_t>(i)]] += 1;
        }
        double h = 0.0;
        for (const auto& [_, c] : counts) {
            double tot = 0;
            for (auto [__, v] : c) tot += v;
            for (auto [__, v] : c) h -= v / tot * std::log(v / tot);
        }
        double mean = 0, var = 0;
        for (auto [_, v] : sizes) mean += v / static_cast<double>(sizes.size());
        for (auto [_, v] : sizes) var += (v - mean) * (v - mean) / static_cast<double>(sizes.size());
        worst = std::max(worst, std::abs(h - cluster::entropy_sum(a, lab)));
        worst = std::max(worst, std::abs(std::sqrt(var) - cluster::balanced_score(a)));
    }
    o.require(worst <= 1e-12, "brute-force agreement to 1e-12");
    o.note("14ln4 err " + fmt("%.1e", std::abs(e_spread - 14.0 * std::log(4.0))) + ", brute-force max err " +
           fmt("%.1e", worst));
    return o;
}

// ==== AC3 score dominance =====================================================

Outcome ac3() {
    Outcome o;
    Rng rng(3003);
    const int dim = 32, kb_n = 785;
    // Topic directions per tactic; kb rows and filing paragraphs mix them.
    Eigen::MatrixXd topics = testing::random_matrix(rng, 14, dim).cwiseAbs();
    score::KnowledgebaseVectors kb;
    kb.unit.resize(kb_n, dim);
    for (int i = 0; i < kb_n; ++i) {
        const auto t = static_cast<std::size_t>(i % 14);
        kb.tactics.emplace_back(cluster::kTactics[t]);
        kb.unit.row(i) = topics.row(static_cast<Eigen::Index>(t)) + 0.5 * testing::random_matrix(rng, 1, dim);
    }
    kb.unit = kb.unit.rowwise().normalized().eval();
    const auto& groups = cluster::reference_super_tactics();
    const auto& dict = score::default_risk_dictionary();
    const std::vector<std::string> vocab{"risk", "uncertainty", "revenue", "customers", "breach", "growth", "may"};

    int filings = 0, dominated = 0, bounded = 0;
    for (int f = 0; f < 200; ++f) {
        score::FilingInput in;
        in.firm_id = "F" + std::to_string(f);
        in.filing_date = {2015 + f % 5, 3, 2};
        const int paras = 5 + static_cast<int>(rng.below(40));
        in.unit.resize(paras, dim);
        for (int p = 0; p < paras; ++p) {
            in.unit.row(p) = topics.row(static_cast<Eigen::Index>(rng.below(14))) * rng.uniform() +
                             testing::random_matrix(rng, 1, dim);
            std::vector<std::string> tok;
            for (int w = 0; w < 6; ++w) tok.push_back(vocab[rng.below(vocab.size())]);
            in.paragraph_tokens.push_back(tok);
        }
        in.unit = in.unit.rowwise().normalized().eval();
        auto rows = score::score_filing(in, kb, groups, dict);
        double overall = 0;
        for (const auto& r : rows)
            if (r.kind == kOverallKind) overall = r.value;
        bool dom = true, inside = true;
        for (const auto& r : rows) {
            dom = dom && r.value <= overall;
            inside = inside && r.value >= -1.0 && r.value <= 1.0;
        }
        ++filings;
        dominated += dom;
        bounded += inside;
    }
    o.require(dominated == filings, "overall >= every sub-score and sentiment");
    o.require(bounded == filings, "scores in [-1, 1]");
    o.note(std::to_string(dominated) + "/" + std::to_string(filings) + " dominated, " + std::to_string(bounded) + "/" +
           std::to_string(filings) + " bounded");
    return o;
}

// ==== AC4 sort machinery ======================================================

Outcome ac4() {
    Outcome o;
    const int seeds = 100, firms = 200, months = 180;
    const double step = 0.001;
    std::vector<double> bin_mean(5, 0.0);
    double spread = 0.0;
    bool full_months = true;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(mix_seed(4004, static_cast<std::uint64_t>(s)));
        ReturnsPanel returns;
        ScorePanel scores;
        const YearMonth start{2009, 1};
        std::vector<double> beta(firms), cap(firms);
        for (int i = 0; i < firms; ++i) {
            beta[static_cast<std::size_t>(i)] = rng.uniform(0.7, 1.3);
            cap[static_cast<std::size_t>(i)] = std::exp(rng.normal(0.0, 1.0));
        }
        std::vector<double> current(firms, -1.0);
        // A year of filings precedes the first sorted quarter.
        for (int t = 0; t < months + 15; ++t) {
            const YearMonth m = start.plus(t - 15);
            // Annual filings in February; a quarter sees the filing only
            // once the quarter starts after it.
            if (m.month == 2)
                for (int i = 0; i < firms; ++i) {
                    const double u = rng.uniform();
                    char id[8];
                    std::snprintf(id, sizeof id, "A%03d", i);
                    scores.add({id, {m.year, 2, 15}, kOverallKind, u});
                }
            if (m.is_quarter_start()) {
                for (int i = 0; i < firms; ++i) {
                    char id[8];
                    std::snprintf(id, sizeof id, "A%03d", i);
                    auto known = scores.latest_before(id, kOverallKind, Date::first_of(m));
                    current[static_cast<std::size_t>(i)] = known ? known->second : -1.0;
                }
            }
            const double mkt = 0.006 + 0.045 * rng.normal();
            for (int i = 0; i < firms; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                char id[8];
                std::snprintf(id, sizeof id, "A%03d", i);
                const double u = current[ii];
                const double planted = u < 0 ? 0.0 : step * std::floor(5.0 * u);
                cap[ii] *= std::exp(0.01 * rng.normal());
                returns.add({id, m, planted + beta[ii] * mkt + 0.08 * rng.normal(), cap[ii], {}});
            }
        }
        portfolio::SortOptions opt;
        opt.first_month = start;
        opt.last_month = start.plus(months - 1);
        auto res = portfolio::quantile_sort(returns, scores, opt);
        for (int b = 0; b < 5; ++b) bin_mean[static_cast<std::size_t>(b)] += stats::mean(res.bins[static_cast<std::size_t>(b)].returns) / seeds;
        spread += stats::mean(portfolio::long_short(res.bins[4], res.bins[0]).returns) / seeds;
        full_months = full_months && res.bins[0].size() == static_cast<std::size_t>(months);
    }
    o.require(full_months, "every month of the sample sorted");
    bool increasing = true;
    for (int b = 1; b < 5; ++b) increasing = increasing && bin_mean[static_cast<std::size_t>(b)] > bin_mean[static_cast<std::size_t>(b - 1)];
    o.require(increasing, "quintile means strictly increasing");
    o.require(std::abs(spread - 0.004) <= 0.15 * 0.004, "P5-P1 within 15% of 0.4%/mo");
    std::string means;
    for (double m : bin_mean) means += fmt("%.4f ", m * 100);
    o.note("mean %/mo by quintile: " + means + "P5-P1 " + fmt("%.4f%%", spread * 100));
    return o;
}

// ==== AC5 Fama-MacBeth recovery ===============================================

Outcome ac5() {
    Outcome o;
    const int seeds = 500, firms = 200, months = 180;
    const double gamma = 0.04;
    int covered = 0;
    double avg = 0.0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(mix_seed(5005, static_cast<std::uint64_t>(s)));
        ReturnsPanel returns;
        ScorePanel scores;
        FactorPanel factors;
        factors.names = {"mkt"};
        factors.values.resize(months, 1);
        const YearMonth start{2009, 1};
        std::vector<double> beta(firms), current(firms, 0.0), level(firms);
        std::vector<std::string> ids(firms);
        for (int i = 0; i < firms; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            beta[ii] = rng.uniform(0.5, 1.5);
            level[ii] = rng.uniform(0.35, 0.65);
            char id[8];
            std::snprintf(id, sizeof id, "A%03d", i);
            ids[ii] = id;
        }
        for (int t = 0; t < months; ++t) {
            const YearMonth m = start.plus(t);
            factors.months.push_back(m);
            if (m.month == 2)
                for (int i = 0; i < firms; ++i) {
                    const auto ii = static_cast<std::size_t>(i);
                    scores.add({ids[ii], {m.year, 2, 10}, kOverallKind, level[ii] + 0.05 * rng.normal()});
                }
            if (m.is_quarter_start())
                for (int i = 0; i < firms; ++i) {
                    const auto ii = static_cast<std::size_t>(i);
                    auto known = scores.latest_before(ids[ii], kOverallKind, Date::first_of(m));
                    current[ii] = known ? known->second : 0.0;
                }
            const double mkt = 0.006 + 0.045 * rng.normal();
            factors.values(t, 0) = mkt;
            for (int i = 0; i < firms; ++i) {
                const auto ii = static_cast<std::size_t>(i);
                returns.add({ids[ii], m, gamma * current[ii] + beta[ii] * mkt + 0.06 * rng.normal(), 1.0 + rng.uniform(), {}});
            }
        }
        portfolio::SortOptions opt;
        opt.n_bins = 20;
        auto sorted = portfolio::quantile_sort(returns, scores, opt);
        pricing::FmInputs in{&returns, &factors, &sorted, 24};
        auto res = pricing::fama_macbeth(in, pricing::default_fm_models()[2]);
        const auto& c = res.premia.back();
        avg += c.mean / seeds;
        if (std::abs(c.mean - gamma) <= 2.0 * c.std_error) ++covered;
    }
    o.require(covered >= static_cast<int>(std::ceil(0.93 * seeds)), ">= 93% within 2 SE");
    o.note(std::to_string(covered) + "/" + std::to_string(seeds) + " within 2 SE, mean estimate " + fmt("%.4f", avg));
    return o;
}

// ==== AC6 GRS =================================================================

double hand_grs(const Eigen::MatrixXd& R, const Eigen::VectorXd& f) {
    const double T = static_cast<double>(f.size());
    const double fb = f.mean();
    const double sff = (f.array() - fb).square().sum();
    double alpha[2], s[3] = {0, 0, 0};
    Eigen::MatrixXd e(f.size(), 2);
    for (int i = 0; i < 2; ++i) {
        const double rb = R.col(i).mean();
        const double b = ((f.array() - fb) * (R.col(i).array() - rb)).sum() / sff;
        alpha[i] = rb - b * fb;
        e.col(i) = R.col(i).array() - alpha[i] - b * f.array();
    }
    for (Eigen::Index t = 0; t < f.size(); ++t) {
        s[0] += e(t, 0) * e(t, 0) / T;
        s[1] += e(t, 0) * e(t, 1) / T;
        s[2] += e(t, 1) * e(t, 1) / T;
    }
    const double q = (alpha[0] * alpha[0] * s[2] - 2 * alpha[0] * alpha[1] * s[1] + alpha[1] * alpha[1] * s[0]) /
                     (s[0] * s[2] - s[1] * s[1]);
    return (T - 3) / 2 * q / (1 + fb * fb / (sff / T));
}

Outcome ac6() {
    Outcome o;
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(mix_seed(6006, static_cast<std::uint64_t>(rep)));
        const int T = 30 + static_cast<int>(rng.below(200));
        Eigen::VectorXd f = (0.005 + 0.04 * testing::random_matrix(rng, T, 1).array()).matrix();
        Eigen::MatrixXd R(T, 2);
        for (int i = 0; i < 2; ++i)
            R.col(i) = rng.normal(0, 0.003) + rng.uniform(0.5, 1.5) * f.array() +
                       0.02 * testing::random_matrix(rng, T, 1).array();
        worst = std::max(worst, std::abs(pricing::grs_test(R, f).statistic - hand_grs(R, f)));
    }
    o.require(worst <= 1e-10, "hand oracle to 1e-10");

    const int reps = 2000, T = 180, N = 10, K = 5;
    int rejected = 0;
    auto t0 = Clock::now();
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(mix_seed(6106, static_cast<std::uint64_t>(rep)));
        Eigen::MatrixXd F = (0.004 + 0.03 * testing::random_matrix(rng, T, K).array()).matrix();
        Eigen::MatrixXd B = testing::random_matrix(rng, K, N) * 0.5;
        Eigen::MatrixXd R = F * B + 0.02 * testing::random_matrix(rng, T, N);
        if (pricing::grs_test(R, F).p_value < 0.05) ++rejected;
    }
    const double elapsed = seconds_since(t0);
    const double rate = static_cast<double>(rejected) / reps;
    o.require(rate >= 0.03 && rate <= 0.07, "null rejection rate in [3%, 7%]");
    o.require(elapsed < 60.0, "runtime < 60 s");
    o.note("oracle max err " + fmt("%.1e", worst) + ", size " + fmt("%.4f", rate) + ", " + fmt("%.2fs", elapsed));
    return o;
}

// ==== AC7 Bayesian scan =======================================================

Outcome ac7() {
    Outcome o;
    std::vector<double> equal(32, -812.25);
    auto uni = pricing::posterior_probabilities(equal);
    bool exact = std::all_of(uni.begin(), uni.end(), [](double p) { return p == 1.0 / 32.0; });
    o.require(exact, "equal marginal likelihoods give exactly uniform posteriors");

    const int seeds = 50, T = 360;
    int ok = 0, low_end = 0, falling = 0;
    double worst_sum = 0.0, avg_end = 0.0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(mix_seed(7007, static_cast<std::uint64_t>(s)));
        FactorPanel fp;
        fp.names = {"mkt", "f1", "f2", "f3", "f4", "f5"};
        fp.values.resize(T, 6);
        for (int t = 0; t < T; ++t) {
            fp.months.push_back(YearMonth{1990, 1}.plus(t));
            const double mkt = 0.006 + 0.045 * rng.normal();
            const double f1 = 0.008 + 0.2 * mkt + 0.03 * rng.normal();
            fp.values(t, 0) = mkt;
            fp.values(t, 1) = f1;
            // Redundant candidates: zero alpha against {mkt, f1}.
            for (int j = 2; j < 6; ++j) fp.values(t, j) = 0.3 * mkt + 0.4 * f1 + 0.03 * rng.normal();
        }
        pricing::BsOptions opt;
        opt.expanding = true;
        auto post = pricing::bs_posteriors(fp, "mkt", {"f1", "f2", "f3", "f4", "f5"}, opt);
        for (const auto& snap : post.path) {
            double sum = 0;
            for (double p : snap.probabilities) sum += p;
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
        // Least-squares trend of the F1 cumulative posterior over the last 120 months.
        const std::size_t n = post.path.size(), w = 120;
        double xb = (w - 1) / 2.0, yb = 0, sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < w; ++i) yb += post.path[n - w + i].cumulative[0] / w;
        for (std::size_t i = 0; i < w; ++i) {
            const double x = static_cast<double>(i) - xb;
            sxy += x * (post.path[n - w + i].cumulative[0] - yb);
            sxx += x * x;
        }
        const double end = post.path.back().cumulative[0];
        avg_end += end / seeds;
        low_end += end <= 0.9;
        falling += sxy / sxx < 0.0;
        if (end > 0.9 && sxy / sxx >= 0.0) ++ok;
    }
    o.require(worst_sum <= 1e-9, "posteriors sum to 1 within 1e-9");
    o.require(ok >= static_cast<int>(std::ceil(0.9 * seeds)), "F1 > 0.9 at end with non-decreasing trend in >= 90% of seeds");
    o.note(std::to_string(ok) + "/" + std::to_string(seeds) + " seeds, mean final F1 posterior " + fmt("%.4f", avg_end) +
           ", max |sum-1| " + fmt("%.1e", worst_sum) + ", end<=0.9 in " + std::to_string(low_end) + ", falling trend in " +
           std::to_string(falling));
    return o;
}

// ==== AC8 event study and Welch ===============================================

Outcome ac8() {
    Outcome o;
    std::vector<Date> cal;
    for (Date d{2019, 1, 1}; d < Date{2021, 1, 1};) {
        cal.push_back(d);
        if (++d.day > days_in_month(d.year, d.month)) {
            d.day = 1;
            if (++d.month > 12) d.month = 1, ++d.year;
        }
    }
    const Date event{2020, 6, 15};
    std::vector<events::EventWindow> windows{{-1, 3}, {-1, 1}, {2, 3}};
    double additivity = 0.0, exact = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        Rng rng(mix_seed(8008, static_cast<std::uint64_t>(rep)));
        events::DailySeries m, noisy, clean;
        for (Date d : cal) {
            m[d] = 0.01 * rng.normal();
            noisy[d] = 0.0003 + 1.1 * m[d] + 0.01 * rng.normal();
            clean[d] = 0.0003 + 1.1 * m[d];
        }
        auto a = events::car(noisy, m, event, cal, windows);
        additivity = std::max(additivity, std::abs(a.windows[0].car - a.windows[1].car - a.windows[2].car));
        auto c = events::car(clean, m, event, cal, windows);
        for (const auto& w : c.windows) exact = std::max(exact, std::abs(w.car));
    }
    o.require(additivity <= 1e-12, "CAR additivity to 1e-12");
    o.require(exact <= 1e-12, "exact market model gives CAR 0");

    const int sims = 2000;
    int rejected = 0;
    for (int s = 0; s < sims; ++s) {
        Rng rng(mix_seed(8108, static_cast<std::uint64_t>(s)));
        std::vector<double> a(180), b(180);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        if (events::welch_test(a, b).p_value < 0.05) ++rejected;
    }
    const double rate = static_cast<double>(rejected) / sims;
    o.require(rate >= 0.03 && rate <= 0.07, "Welch size in [3%, 7%]");
    o.note("additivity err " + fmt("%.1e", additivity) + ", exact-model |CAR| " + fmt("%.1e", exact) + ", Welch size " +
           fmt("%.4f", rate));
    return o;
}

// ==== AC9 fixed effects =======================================================

Outcome ac9() {
    Outcome o;
    // 3 firms x 3 years, two-way demeaning by hand.
    Rng rng(9009);
    std::vector<pricing::PanelRow> rows;
    double y[3][3], x[3][3];
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 3; ++t) {
            x[i][t] = rng.normal();
            y[i][t] = 0.7 * x[i][t] + i + 0.5 * t + 0.3 * rng.normal();
            rows.push_back({"F" + std::to_string(i), "I", 2000 + t, y[i][t], {x[i][t]}});
        }
    auto dm = [](double (&a)[3][3], int i, int t) {
        double ri = 0, ct = 0, g = 0;
        for (int k = 0; k < 3; ++k) ri += a[i][k] / 3, ct += a[k][t] / 3;
        for (auto& r : a)
            for (double v : r) g += v / 9;
        return a[i][t] - ri - ct + g;
    };
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i)
        for (int t = 0; t < 3; ++t) {
            sxy += dm(x, i, t) * dm(y, i, t);
            sxx += dm(x, i, t) * dm(x, i, t);
        }
    auto fe = pricing::fe_determinants(rows, {"x"}, pricing::FixedEffects::FirmYear);
    const double err = std::abs(fe.coefficients(0) - sxy / sxx);
    o.require(err <= 1e-10, "3x3 manual demeaning to 1e-10");

    const int seeds = 500, firms = 100, years = 10;
    double clustered = 0, plain = 0;
    int larger = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng r(mix_seed(9109, static_cast<std::uint64_t>(s)));
        std::vector<pricing::PanelRow> panel;
        for (int i = 0; i < firms; ++i) {
            double ex = r.normal(), ee = r.normal();
            for (int t = 0; t < years; ++t) {
                ex = 0.8 * ex + 0.6 * r.normal();
                ee = 0.8 * ee + 0.6 * r.normal();
                panel.push_back({"F" + std::to_string(i), "I" + std::to_string(i % 12), 2000 + t, 0.5 * ex + ee, {ex}});
            }
        }
        auto res = pricing::fe_determinants(panel, {"x"}, pricing::FixedEffects::FirmYear);
        clustered += res.clustered_se(0) / seeds;
        plain += res.unclustered_se(0) / seeds;
        larger += res.clustered_se(0) > res.unclustered_se(0);
    }
    o.require(clustered > plain, "clustered SE exceeds unclustered on average");
    o.note("manual err " + fmt("%.1e", err) + ", mean SE clustered " + fmt("%.5f", clustered) + " vs " +
           fmt("%.5f", plain) + " (" + std::to_string(larger) + "/" + std::to_string(seeds) + " seeds larger)");
    return o;
}

// ==== AC10 end-to-end determinism =============================================

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> tables(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext == ".csv" || ext == ".tsv") out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    return out;
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome ac10(const std::string& cli, const fs::path& work) {
    Outcome o;
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string q = "\"" + cli + "\"";
    const auto data = work / "data";
    auto t0 = Clock::now();
    int rc = run(q + " synth --seed 7 --out \"" + data.string() + "\"");
    rc |= run(q + " report --seed 7 --data \"" + data.string() + "\" --out \"" + (work / "run1").string() + "\"");
    const double first = seconds_since(t0);
    auto t1 = Clock::now();
    rc |= run(q + " report --seed 7 --data \"" + data.string() + "\" --out \"" + (work / "run2").string() + "\"");
    const double second = seconds_since(t1);
    o.require(rc == 0, "synth and report exit 0");
    if (rc != 0) return o;

    auto a = tables(work / "run1"), b = tables(work / "run2");
    std::size_t same = 0;
    for (const auto& [name, body] : a) {
        auto it = b.find(name);
        if (it != b.end() && it->second == body) ++same;
    }
    o.require(!a.empty() && a.size() == b.size() && same == a.size(), "byte-identical tables across runs");
    for (auto name : {"scores.csv", "portfolios_5.csv", "alphas.csv", "fm.csv", "grs.csv", "bgrs_cumulative.csv",
                      "event.csv", "welch.csv", "cluster_grid.csv", "determinants.csv"}) {
        bool found = false;
        for (const auto& [n, _] : a) found = found || fs::path(n).filename() == name;
        o.require(found, std::string("report table ") + name);
    }
    o.require(first < 60.0, "synth + pipeline < 60 s");
    o.note(std::to_string(same) + "/" + std::to_string(a.size()) + " tables identical, synth+report " +
           fmt("%.1fs", first) + ", rerun " + fmt("%.1fs", second));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cyberscore-binary> <work-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = argv[2];

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 clustering recovery", ac1},
        {"AC2 entropy/balanced scoring", ac2},
        {"AC3 score dominance", ac3},
        {"AC4 sort machinery", ac4},
        {"AC5 Fama-MacBeth recovery", ac5},
        {"AC6 GRS correctness and size", ac6},
        {"AC7 Bayesian scan", ac7},
        {"AC8 event study and Welch", ac8},
        {"AC9 fixed-effects determinants", ac9},
        {"AC10 end-to-end determinism", [&] { return ac10(cli, work); }},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " | " << o.detail << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failed) << "/"
              << criteria.size() << std::endl;
    return failed ? 1 : 0;
}
