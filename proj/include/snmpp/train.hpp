#pragma once

#include <functional>
#include <span>
#include <vector>

#include "snmpp/likelihood.hpp"
#include "snmpp/model_spec.hpp"
#include "snmpp/optimizer.hpp"

namespace snmpp {

struct TrainConfig {
    OptimizerConfig optimizer;
    NLLConfig nll;
    int epochs = 100;
    int patience = 15;  // early stopping on validation NLL
    std::uint64_t seed = 0;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const {
        optimizer.validate();
        nll.validate();
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    }
};

struct EpochStats {
    int epoch = 0;
    double train_nll = 0.0;
    double val_nll = 0.0;
    double wall_seconds = 0.0;
    int clamped_events = 0;
};

struct TrainResult {
    ParamStore best_params;
    double best_val_nll = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    bool diverged = false;
    std::vector<EpochStats> history;
};

// Mini-batch AdamW training of the intensity model by stochastic maximum
// likelihood. Stratification samples are redrawn every epoch; the validation
// NLL uses a fixed stream so epochs are comparable. The best-by-validation
// parameters are retained. Deterministic given the config.
TrainResult train_model(const ModelSpec& spec, std::span<const EventSequence> train_data,
                        std::span<const EventSequence> val_data, const TrainConfig& config,
                        const std::function<void(const EpochStats&)>& on_epoch = nullptr);

}  // namespace snmpp
