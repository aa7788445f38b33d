#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace snmpp {

struct Event {
    double t = 0.0;
    int k = 0;
};

// Ordered marked events on [0, horizon). Times are strictly increasing and
// every time is < horizon; marks are 0-based in [0, num_types).
struct EventSequence {
    std::vector<Event> events;
    double horizon = 0.0;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }

    // Validates ordering, bounds and marks. num_types < 0 skips the mark check.
    void validate(int num_types = -1) const {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("EventSequence: horizon must be positive and finite");
        }
        double prev = -1.0;
        for (const Event& e : events) {
            if (!std::isfinite(e.t) || e.t < 0.0) {
                throw std::invalid_argument("EventSequence: event times must be finite and >= 0");
            }
            if (e.t <= prev) {
                throw std::invalid_argument("EventSequence: event times must be strictly increasing");
            }
            if (e.t >= horizon) {
                throw std::invalid_argument("EventSequence: event time at or beyond the horizon");
            }
            if (num_types >= 0 && (e.k < 0 || e.k >= num_types)) {
                throw std::invalid_argument("EventSequence: mark out of range");
            }
            prev = e.t;
        }
    }

    // Events strictly before t.
    std::span<const Event> history_before(double t) const {
        std::size_t n = 0;
        while (n < events.size() && events[n].t < t) ++n;
        return {events.data(), n};
    }
};

// Mean gap between consecutive events, pooled across sequences. Returns the
// fallback when no sequence has two or more events.
inline double pooled_mean_gap(std::span<const EventSequence> data, double fallback = 1.0) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& seq : data) {
        for (std::size_t i = 1; i < seq.events.size(); ++i) {
            sum += seq.events[i].t - seq.events[i - 1].t;
            ++n;
        }
    }
    return n > 0 ? sum / static_cast<double>(n) : fallback;
}

}  // namespace snmpp
