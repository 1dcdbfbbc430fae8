#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ehe/calendar.hpp"

namespace ehe {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

struct Station {
    std::string id;
    std::string name;
    double longitude = 0;  // degrees east
    double latitude = 0;   // degrees north
    double elevation = 0;  // meters

    void validate() const;  // throws std::invalid_argument
};

/// Daily maxima on consecutive calendar days; missing days are NaN, never skipped.
struct StationSeries {
    Station station;
    Date start_date;
    std::vector<double> tmax;  // °C, NaN = missing

    std::size_t size() const { return tmax.size(); }
    Date date_at(std::size_t i) const { return add_days(start_date, static_cast<std::int64_t>(i)); }
    int year_at(std::size_t i) const { return date_at(i).year; }
    int month_at(std::size_t i) const { return date_at(i).month; }
    int day_of_year_at(std::size_t i) const { return day_of_year(date_at(i)); }
    int year_length_at(std::size_t i) const { return year_length(year_at(i)); }
    /// 1-based index of the entry's calendar year relative to the series' first year.
    int year_index_at(std::size_t i) const { return year_at(i) - start_date.year + 1; }
};

struct Threshold {
    std::string station_id;
    double q = 0;  // °C
    int baseline_start_year = 0;
    int baseline_end_year = 0;
    std::set<int> months;
    std::size_t n_baseline_days = 0;  // non-missing values the quantile was taken over
};

// Per-day state: 1 above (tmax >= q), 0 below, -1 missing.
using StateSequence = std::vector<std::int8_t>;
inline constexpr std::int8_t kStateBelow = 0;
inline constexpr std::int8_t kStateAbove = 1;
inline constexpr std::int8_t kStateMissing = -1;

/// A maximal run of consecutive above-threshold days.
struct EheEvent {
    std::size_t start_index = 0;
    int duration = 0;            // days, >= 1
    double avg_exceedance = 0;   // mean(tmax - q) over the run, °C
    double max_exceedance = 0;   // max(tmax - q) over the run, °C
    int start_month = 0;         // 1..12, month the event starts in
};

/// Empirical p-quantile (nearest-rank: the ceil(p*n)-th order statistic) of the
/// non-missing values falling in the baseline years and months.
/// Throws std::runtime_error("no baseline data") when the selection is empty.
Threshold compute_threshold(const StationSeries& series, int baseline_start_year,
                            int baseline_end_year, const std::set<int>& months, double p);

/// tmax >= q maps to 1, tmax < q to 0, missing stays missing.
StateSequence derive_states(const StationSeries& series, const Threshold& threshold);

/// Maximal runs of state 1; a missing day terminates a run. Exceedance statistics
/// are relative to threshold.q; events are stamped with their starting month.
std::vector<EheEvent> extract_events(const StationSeries& series, const StateSequence& states,
                                     const Threshold& threshold);

/// Duration bin [lo, hi] in days; hi == INT32_MAX means unbounded.
using DurationBins = std::vector<std::pair<int, int>>;
DurationBins default_duration_bins();  // {1},{2},{3},{4-5},{6-7},{8+}

struct DurationHistogram {
    std::vector<double> probs;  // one per bin, sums to 1 when !empty
    std::size_t n_events = 0;
    bool empty = true;
};

/// Proportion of events per duration bin. Bins must partition {1,2,...}.
DurationHistogram duration_histogram(const std::vector<EheEvent>& events, const DurationBins& bins);

enum class ExceedanceStat { average, maximum };

struct ExceedanceCdf {
    std::vector<double> prob_ge;  // P(statistic >= level), one per level
    std::size_t n_events = 0;     // qualifying events (duration >= min_duration)
    bool empty = true;
};

/// Complement CDF of the per-event average or maximum exceedance over events
/// lasting at least min_duration days.
ExceedanceCdf exceedance_cdf_complement(const std::vector<EheEvent>& events, int min_duration,
                                        const std::vector<double>& levels, ExceedanceStat which);

}  // namespace ehe
