#include "cyberscore/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyberscore/stats.hpp"

namespace cyber::events {

std::string EventWindow::label() const {
    return "CAR[" + std::to_string(start) + "," + std::to_string(end) + "]";
}

namespace {

double value_on(const DailySeries& s, Date d, const char* what) {
    auto it = s.find(d);
    if (it == s.end()) throw std::invalid_argument(std::string("missing ") + what + " return on " + d.iso());
    return it->second;
}

}  // namespace

EventStudy car(const DailySeries& asset, const DailySeries& market, Date event_date,
               std::span<const Date> calendar, std::span<const EventWindow> windows, int estimation_days) {
    if (windows.empty()) throw std::invalid_argument("no event windows");
    if (estimation_days < 3) throw std::invalid_argument("estimation span must cover at least 3 days");
    if (!std::is_sorted(calendar.begin(), calendar.end())) throw std::invalid_argument("calendar is not sorted");
    auto it = std::lower_bound(calendar.begin(), calendar.end(), event_date);
    if (it == calendar.end() || *it != event_date)
        throw std::invalid_argument("event date " + event_date.iso() +
                                    " is not a trading day; resolve t=0 explicitly");
    const auto t0 = static_cast<long>(it - calendar.begin());
    int earliest = windows.front().start, latest = windows.front().end;
    for (const auto& w : windows) {
        if (w.start > w.end) throw std::invalid_argument("window start after end: " + w.label());
        earliest = std::min(earliest, w.start);
        latest = std::max(latest, w.end);
    }
    const long first_window = t0 + earliest;
    const long est_begin = first_window - estimation_days;
    if (est_begin < 0) throw std::invalid_argument("calendar too short for the estimation span");
    if (t0 + latest >= static_cast<long>(calendar.size())) throw std::invalid_argument("event window runs past the calendar");

    std::vector<double> ra, rm;
    for (long i = est_begin; i < first_window; ++i) {
        Date d = calendar[static_cast<std::size_t>(i)];
        ra.push_back(value_on(asset, d, "asset"));
        rm.push_back(value_on(market, d, "market"));
    }
    EventStudy out;
    double vm = stats::variance(rm);
    if (!(vm > 0.0)) throw std::invalid_argument("market returns are constant over the estimation span");
    out.model.beta = stats::covariance(ra, rm) / vm;
    out.model.alpha = stats::mean(ra) - out.model.beta * stats::mean(rm);
    double ssr = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        double e = ra[i] - out.model.alpha - out.model.beta * rm[i];
        ssr += e * e;
    }
    out.model.n = ra.size();
    out.model.residual_sd = std::sqrt(ssr / static_cast<double>(ra.size() - 2));

    for (const auto& w : windows) {
        EventWindowResult r;
        r.window = w;
        r.length = w.end - w.start + 1;
        for (long i = t0 + w.start; i <= t0 + w.end; ++i) {
            Date d = calendar[static_cast<std::size_t>(i)];
            r.car += value_on(asset, d, "asset") - (out.model.alpha + out.model.beta * value_on(market, d, "market"));
        }
        double se = out.model.residual_sd * std::sqrt(static_cast<double>(r.length));
        r.t_stat = se > 0.0 ? r.car / se : (r.car == 0.0 ? 0.0 : std::copysign(INFINITY, r.car));
        out.windows.push_back(r);
    }
    return out;
}

DailySeries weighted_daily(const DailyReturns& daily, const std::map<std::string, double>& weights,
                           std::span<const Date> calendar) {
    DailySeries out;
    for (Date d : calendar) {
        double acc = 0.0, total = 0.0;
        for (const auto& [asset, w] : weights) {
            auto s = daily.series.find(asset);
            if (s == daily.series.end()) continue;
            auto v = s->second.find(d);
            if (v == s->second.end()) continue;
            acc += w * v->second;
            total += w;
        }
        if (total > 0.0) out.emplace(d, acc / total);
    }
    return out;
}

WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch test needs at least 2 observations per series");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = stats::variance(a) / na, vb = stats::variance(b) / nb;
    WelchResult r;
    r.mean_difference = stats::mean(a) - stats::mean(b);
    if (va + vb <= 0.0) throw std::invalid_argument("welch test undefined: both series have zero variance");
    r.t_stat = r.mean_difference / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p_value = stats::student_t_two_sided(r.t_stat, r.df);
    return r;
}

}  // namespace cyber::events
