// Market-model event studies and Welch mean-difference tests.
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cyberscore/dates.hpp"
#include "cyberscore/panel.hpp"

namespace cyber::events {

using DailySeries = std::map<Date, double>;

struct EventWindow {
    int start = 0;  // trading-day offsets relative to t = 0
    int end = 0;

    std::string label() const;  // e.g. "CAR[-1,3]"
};

struct MarketModel {
    double alpha = 0.0;
    double beta = 0.0;
    double residual_sd = 0.0;  // n - 2 degrees of freedom
    std::size_t n = 0;
};

struct EventWindowResult {
    EventWindow window;
    double car = 0.0;
    double t_stat = 0.0;
    int length = 0;
};

struct EventStudy {
    MarketModel model;
    std::vector<EventWindowResult> windows;
};

inline constexpr int kDefaultEstimationDays = 252;

// `calendar` lists trading days in ascending order. Estimation covers the
// `estimation_days` trading days before the earliest window day.
EventStudy car(const DailySeries& asset, const DailySeries& market, Date event_date,
               std::span<const Date> calendar, std::span<const EventWindow> windows,
               int estimation_days = kDefaultEstimationDays);

// Value-weighted daily returns of fixed holdings; weights are renormalized
// over the holdings that have a return on each day.
DailySeries weighted_daily(const DailyReturns& daily, const std::map<std::string, double>& weights,
                           std::span<const Date> calendar);

struct WelchResult {
    double t_stat = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    double mean_difference = 0.0;
};

WelchResult welch_test(std::span<const double> a, std::span<const double> b);

}  // namespace cyber::events
