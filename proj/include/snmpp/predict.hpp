#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "snmpp/events.hpp"
#include "snmpp/model.hpp"

namespace snmpp {

struct PredictConfig {
    double multiplier = 10.0;  // truncation horizon = multiplier * mean inter-event time
    int inner_grid = 256;      // nodes for the cumulative intensity
    int outer_grid = 256;      // nodes for the survival integral

    void validate() const {
        if (!(multiplier > 0.0)) throw std::invalid_argument("PredictConfig: multiplier must be > 0");
        if (inner_grid < 2 || outer_grid < 2)
            throw std::invalid_argument("PredictConfig: grids must have >= 2 points");
    }
};

struct EvalReport {
    double time_rmse = 0.0;
    double type_error_rate = 0.0;
    std::size_t n_events = 0;
    std::size_t n_skipped_sequences = 0;

    struct PerEvent {
        std::size_t seq = 0;
        std::size_t idx = 0;
        double t_true = 0.0;
        double t_pred = 0.0;
        int k_true = 0;
        int k_pred = 0;
    };
    std::vector<PerEvent> per_event;
};

// E[gap] = int_0^H exp(-Lambda(u)) du with Lambda the cumulative of the total
// intensity at lag u, both by the trapezoid rule. Works for any intensity
// function, so ground-truth oracles can be plugged in directly.
double expected_next_gap(const std::function<double(double)>& total_intensity_at_lag,
                         double horizon, int inner_grid, int outer_grid);

// Smallest index among the maxima.
int argmax_type(std::span<const double> lambdas);

// Model-bound prediction: t_hat = t_last + truncated expected gap, with
// truncation horizon multiplier * mean_gap.
double expected_next_time(const ParamStore& params, const ModelSpec& spec,
                          std::span<const Event> history, double t_last,
                          const PredictConfig& config, double mean_gap);

// argmax_k lambda_k(t_hat | history); ties broken by smallest mark.
int predict_type(const ParamStore& params, const ModelSpec& spec, std::span<const Event> history,
                 double t_hat);

// Predictor interface: (sequence, event index) -> (t_hat, k_hat).
using Predictor =
    std::function<std::pair<double, int>(const EventSequence& seq, std::size_t event_index)>;

// Metric computation over every event of every non-empty sequence; each event
// is predicted from its true prefix.
EvalReport evaluate_with_predictor(std::span<const EventSequence> data, const Predictor& predict,
                                   bool keep_per_event = false);

// Full model evaluation (deterministic; parallel over sequences).
EvalReport evaluate(std::span<const EventSequence> data, const ParamStore& params,
                    const ModelSpec& spec, const PredictConfig& config, double mean_gap,
                    int threads = 1, bool keep_per_event = false);

void write_per_event_csv(const std::string& path, const EvalReport& report);

}  // namespace snmpp
