#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snmpp/events.hpp"
#include "snmpp/model.hpp"
#include "snmpp/optimizer.hpp"
#include "snmpp/rng.hpp"
#include "snmpp/tape.hpp"

namespace snmpp {

enum class Estimator : std::uint8_t {
    stratified,   // one uniform sample per segment of each inter-event interval
    global_gmce,  // single uniform sample over [0, T] for the whole integral
};

struct NLLConfig {
    int segments = 4;  // Q
    std::uint64_t seed = 0;
    Estimator estimator = Estimator::stratified;
    double log_floor = 1e-12;  // intensity floor inside the event-term log

    void validate() const {
        if (segments < 1) throw std::invalid_argument("NLLConfig: Q must be >= 1");
    }
};

struct LossReport {
    double total_nll = 0.0;      // integral_term - event_term
    double event_term = 0.0;     // sum of log-intensities at the events
    double integral_term = 0.0;  // estimated integral of the total intensity
    int clamped_events = 0;      // events whose intensity hit the log floor
    std::vector<double> per_sequence_nll;
};

// Generic estimator cores (the Lemma-1 oracles in the tests integrate
// closed-form functions through these).
template <class Fn>
double stratified_estimate(Fn&& g, double t0, double t1, int segments, Rng& rng) {
    const double width = (t1 - t0) / segments;
    double sum = 0.0;
    for (int q = 0; q < segments; ++q) {
        sum += g(t0 + (q + rng.uniform()) * width);
    }
    return width * sum;
}

template <class Fn>
double uniform_mc_estimate(Fn&& g, double t0, double t1, int samples, Rng& rng) {
    double sum = 0.0;
    for (int i = 0; i < samples; ++i) {
        sum += g(t0 + rng.uniform() * (t1 - t0));
    }
    return (t1 - t0) / samples * sum;
}

// Stratified estimate of int_{t0}^{t1} lambda_k dt with the history held
// fixed over the interval. Degenerate intervals contribute exactly 0.
double stratified_integral(const ParamStore& params, const ModelSpec& spec, int k, double t0,
                           double t1, std::span<const Event> history, int segments, Rng& rng);

// Negative log-likelihood of one sequence (value only).
LossReport sequence_nll(const ParamStore& params, const ModelSpec& spec, const EventSequence& seq,
                        const NLLConfig& config, Rng rng);

// GMCE ablation variant of sequence_nll (value only, single global sample).
LossReport gmce_nll(const ParamStore& params, const ModelSpec& spec, const EventSequence& seq,
                    Rng rng, double log_floor = 1e-12);

// NLL of one sequence with reverse-mode gradient accumulated (scaled by
// `weight`) into grad_accum. The tape is reused across calls; memory stays
// bounded by flushing partial sums through backward passes.
LossReport sequence_nll_grad(const ParamStore& params, const ModelSpec& spec,
                             const EventSequence& seq, const NLLConfig& config, Rng rng,
                             std::span<double> grad_accum, Tape& tape, double weight = 1.0);

// Per-thread tapes and gradient buffers for batch evaluation.
class BatchWorkspace {
public:
    explicit BatchWorkspace(int threads);
    int threads() const { return static_cast<int>(tapes_.size()); }
    Tape& tape(int i) { return tapes_[static_cast<std::size_t>(i)]; }
    std::vector<double>& grad_buffer(int i) { return grads_[static_cast<std::size_t>(i)]; }

private:
    std::vector<Tape> tapes_;
    std::vector<std::vector<double>> grads_;
};

// Mean NLL over the batch plus its gradient. Per-sequence RNG streams are
// derived from (stream_seed, global sequence index), so the result does not
// depend on how work is split across threads; the gradient reduction is an
// ordered summation.
LossReport batch_loss_and_grad(std::span<const EventSequence> data,
                               std::span<const std::size_t> batch_indices,
                               const ParamStore& params, const ModelSpec& spec,
                               const NLLConfig& config, std::uint64_t stream_seed,
                               std::span<double> grad_mean, BatchWorkspace& workspace);

// Mean NLL over whole dataset, value only (validation metric).
double dataset_mean_nll(std::span<const EventSequence> data, const ParamStore& params,
                        const ModelSpec& spec, const NLLConfig& config, std::uint64_t stream_seed,
                        int threads);

}  // namespace snmpp
