#include "ehe/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace ehe {

void Station::validate() const {
    if (id.empty()) throw std::invalid_argument("station id must be non-empty");
    if (!(elevation >= -500.0))
        throw std::invalid_argument("station " + id + ": elevation below -500 m");
    if (!(latitude >= -90.0 && latitude <= 90.0))
        throw std::invalid_argument("station " + id + ": latitude outside [-90, 90]");
    if (!(longitude >= -180.0 && longitude <= 180.0))
        throw std::invalid_argument("station " + id + ": longitude outside [-180, 180]");
}

Threshold compute_threshold(const StationSeries& series, int baseline_start_year,
                            int baseline_end_year, const std::set<int>& months, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probability outside (0, 1]");
    if (baseline_end_year < baseline_start_year)
        throw std::invalid_argument("baseline year range is empty");
    std::vector<double> selected;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const Date d = series.date_at(i);
        if (d.year < baseline_start_year || d.year > baseline_end_year) continue;
        if (!months.contains(d.month)) continue;
        if (!is_missing(series.tmax[i])) selected.push_back(series.tmax[i]);
    }
    if (selected.empty()) throw std::runtime_error("no baseline data for station " + series.station.id);

    std::sort(selected.begin(), selected.end());
    const auto n = selected.size();
    // ceil(p*n) with a guard against p*n landing epsilon above an integer (0.95*100 > 95 in binary).
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, n);

    Threshold t;
    t.station_id = series.station.id;
    t.q = selected[k - 1];
    t.baseline_start_year = baseline_start_year;
    t.baseline_end_year = baseline_end_year;
    t.months = months;
    t.n_baseline_days = n;
    return t;
}

StateSequence derive_states(const StationSeries& series, const Threshold& threshold) {
    if (threshold.station_id != series.station.id)
        throw std::invalid_argument("threshold station '" + threshold.station_id +
                                    "' does not match series station '" + series.station.id + "'");
    StateSequence u(series.size(), kStateMissing);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (is_missing(series.tmax[i])) continue;
        u[i] = series.tmax[i] >= threshold.q ? kStateAbove : kStateBelow;
    }
    return u;
}

std::vector<EheEvent> extract_events(const StationSeries& series, const StateSequence& states,
                                     const Threshold& threshold) {
    if (states.size() != series.size())
        throw std::invalid_argument("state sequence and series are not aligned");
    std::vector<EheEvent> events;
    const std::size_t n = states.size();
    std::size_t i = 0;
    while (i < n) {
        if (states[i] != kStateAbove) {
            ++i;
            continue;
        }
        EheEvent ev;
        ev.start_index = i;
        ev.start_month = series.month_at(i);
        double sum = 0, mx = -std::numeric_limits<double>::infinity();
        std::size_t j = i;
        while (j < n && states[j] == kStateAbove) {
            const double exc = series.tmax[j] - threshold.q;
            sum += exc;
            mx = std::max(mx, exc);
            ++j;
        }
        ev.duration = static_cast<int>(j - i);
        ev.avg_exceedance = sum / ev.duration;
        ev.max_exceedance = mx;
        events.push_back(ev);
        i = j;
    }
    return events;
}

DurationBins default_duration_bins() {
    return {{1, 1}, {2, 2}, {3, 3}, {4, 5}, {6, 7}, {8, INT32_MAX}};
}

namespace {

void check_bins_partition(const DurationBins& bins) {
    if (bins.empty()) throw std::invalid_argument("duration bins are empty");
    int expect_lo = 1;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        const auto [lo, hi] = bins[b];
        if (lo != expect_lo || hi < lo)
            throw std::invalid_argument("duration bins do not partition {1,2,...}");
        if (b + 1 == bins.size()) {
            if (hi != INT32_MAX)
                throw std::invalid_argument("last duration bin must be unbounded");
        } else {
            expect_lo = hi + 1;
        }
    }
}

}  // namespace

DurationHistogram duration_histogram(const std::vector<EheEvent>& events, const DurationBins& bins) {
    check_bins_partition(bins);
    DurationHistogram h;
    h.probs.assign(bins.size(), 0.0);
    h.n_events = events.size();
    h.empty = events.empty();
    if (h.empty) return h;
    for (const auto& ev : events) {
        for (std::size_t b = 0; b < bins.size(); ++b) {
            if (ev.duration >= bins[b].first && ev.duration <= bins[b].second) {
                h.probs[b] += 1.0;
                break;
            }
        }
    }
    for (auto& p : h.probs) p /= static_cast<double>(h.n_events);
    return h;
}

ExceedanceCdf exceedance_cdf_complement(const std::vector<EheEvent>& events, int min_duration,
                                        const std::vector<double>& levels, ExceedanceStat which) {
    if (min_duration < 1) throw std::invalid_argument("min_duration must be >= 1");
    ExceedanceCdf c;
    c.prob_ge.assign(levels.size(), 0.0);
    for (const auto& ev : events) {
        if (ev.duration < min_duration) continue;
        ++c.n_events;
        const double stat = which == ExceedanceStat::average ? ev.avg_exceedance : ev.max_exceedance;
        for (std::size_t l = 0; l < levels.size(); ++l)
            if (stat >= levels[l]) c.prob_ge[l] += 1.0;
    }
    c.empty = c.n_events == 0;
    if (!c.empty)
        for (auto& p : c.prob_ge) p /= static_cast<double>(c.n_events);
    return c;
}

}  // namespace ehe
