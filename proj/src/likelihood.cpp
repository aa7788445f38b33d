#include "snmpp/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace snmpp {

namespace {

// Tape nodes per flush; bounds per-thread memory at ~50 MB.
constexpr std::size_t kChunkBudget = 100000;

// Accumulates NLL terms as plain doubles.
struct ValueAccumulator {
    double total = 0.0;
    void push(double term) { total += term; }
    void push_const(double term) { total += term; }
    void finish() {}
};

// Accumulates NLL terms on a tape; flushes the running chunk sum through a
// backward pass whenever the tape grows past the budget, then truncates back
// to the cached-parameter region.
struct TapeAccumulator {
    Tape& tape;
    std::size_t mark;
    double weight;
    std::span<double> grad;
    bool has_chunk = false;
    Var chunk{};
    double total = 0.0;

    void push(Var term) {
        chunk = has_chunk ? chunk + term : term;
        has_chunk = true;
        if (tape.size() > kChunkBudget) flush();
    }
    void push_const(double term) {
        if (has_chunk) {
            chunk = chunk + term;
        } else {
            chunk = make_constant(tape, term);
            has_chunk = true;
        }
    }
    void flush() {
        if (!has_chunk) return;
        total += chunk.value();
        Var scaled = weight == 1.0 ? chunk : chunk * weight;
        tape.backward_accumulate(scaled.id, grad);
        tape.truncate(mark);
        has_chunk = false;
    }
    void finish() { flush(); }
};

// Shared NLL term enumeration; both scalar paths instantiate this so the RNG
// consumption order is identical by construction.
template <class PV, class Acc>
LossReport accumulate_nll(Evaluator<PV>& ev, const EventSequence& seq, const NLLConfig& cfg,
                          Rng& rng, Acc& acc) {
    using S = typename PV::scalar;
    cfg.validate();
    const ModelSpec& spec = ev.spec();
    seq.validate(spec.num_types);

    LossReport rep;
    const std::size_t N = seq.size();
    const double T = seq.horizon;
    const double floor_log = std::log(cfg.log_floor);

    if (cfg.estimator == Estimator::global_gmce) {
        const double that = rng.uniform() * T;
        auto hist = seq.history_before(that);
        S tot = ev.intensity(0, that, hist);
        for (int k = 1; k < spec.num_types; ++k) {
            tot = tot + ev.intensity(k, that, hist);
        }
        S integral = tot * T;
        rep.integral_term += value_of(integral);
        acc.push(integral);
    }

    double prev = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
        const double cur = i < N ? seq.events[i].t : T;
        std::span<const Event> hist{seq.events.data(), i};
        if (cfg.estimator == Estimator::stratified && cur > prev) {
            // Inside (prev, cur) the history is fixed and includes the event
            // at prev, so the boundary-inclusive evaluation applies.
            const double width = (cur - prev) / cfg.segments;
            for (int k = 0; k < spec.num_types; ++k) {
                S sum = ev.intensity_right_limit(k, prev + rng.uniform() * width, hist);
                for (int q = 1; q < cfg.segments; ++q) {
                    sum = sum + ev.intensity_right_limit(k, prev + (q + rng.uniform()) * width, hist);
                }
                S integral = sum * width;
                rep.integral_term += value_of(integral);
                acc.push(integral);
            }
        }
        if (i < N) {
            const Event& e = seq.events[i];
            S lam = ev.intensity(e.k, e.t, hist);
            if (!(value_of(lam) >= cfg.log_floor)) {
                ++rep.clamped_events;
                rep.event_term += floor_log;
                acc.push_const(-floor_log);
            } else {
                S lg = log(lam);
                rep.event_term += value_of(lg);
                acc.push(-lg);
            }
            prev = cur;
        }
    }
    acc.finish();
    rep.total_nll = rep.integral_term - rep.event_term;
    return rep;
}

}  // namespace

double stratified_integral(const ParamStore& params, const ModelSpec& spec, int k, double t0,
                           double t1, std::span<const Event> history, int segments, Rng& rng) {
    if (segments < 1) throw std::invalid_argument("stratified_integral: Q must be >= 1");
    if (!(t1 > t0)) return 0.0;  // degenerate interval
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    return stratified_estimate([&](double t) { return ev.intensity(k, t, history); }, t0, t1,
                               segments, rng);
}

LossReport sequence_nll(const ParamStore& params, const ModelSpec& spec, const EventSequence& seq,
                        const NLLConfig& config, Rng rng) {
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    ValueAccumulator acc;
    return accumulate_nll(ev, seq, config, rng, acc);
}

LossReport gmce_nll(const ParamStore& params, const ModelSpec& spec, const EventSequence& seq,
                    Rng rng, double log_floor) {
    NLLConfig cfg;
    cfg.estimator = Estimator::global_gmce;
    cfg.log_floor = log_floor;
    return sequence_nll(params, spec, seq, cfg, rng);
}

LossReport sequence_nll_grad(const ParamStore& params, const ModelSpec& spec,
                             const EventSequence& seq, const NLLConfig& config, Rng rng,
                             std::span<double> grad_accum, Tape& tape, double weight) {
    if (grad_accum.size() != params.size()) {
        throw std::invalid_argument("sequence_nll_grad: gradient buffer size mismatch");
    }
    tape.clear();
    TapeParams pv(tape, params, spec);
    TapeEvaluator ev(spec, params.layout(), pv);
    TapeAccumulator acc{tape, tape.size(), weight, grad_accum};
    acc.mark = tape.size();
    return accumulate_nll(ev, seq, config, rng, acc);
}

BatchWorkspace::BatchWorkspace(int threads) {
    if (threads < 1) threads = 1;
    tapes_.resize(static_cast<std::size_t>(threads));
    grads_.resize(static_cast<std::size_t>(threads));
}

LossReport batch_loss_and_grad(std::span<const EventSequence> data,
                               std::span<const std::size_t> batch_indices,
                               const ParamStore& params, const ModelSpec& spec,
                               const NLLConfig& config, std::uint64_t stream_seed,
                               std::span<double> grad_mean, BatchWorkspace& workspace) {
    const std::size_t B = batch_indices.size();
    if (B == 0) throw std::invalid_argument("batch_loss_and_grad: empty batch");
    if (grad_mean.size() != params.size()) {
        throw std::invalid_argument("batch_loss_and_grad: gradient buffer size mismatch");
    }
    const int T = workspace.threads();
    const double weight = 1.0 / static_cast<double>(B);

    std::vector<double> per_seq(B, 0.0);
    std::vector<LossReport> partial(static_cast<std::size_t>(T));
    std::vector<std::string> errors(static_cast<std::size_t>(T));

    auto worker = [&](int c) {
        const std::size_t lo = B * static_cast<std::size_t>(c) / T;
        const std::size_t hi = B * (static_cast<std::size_t>(c) + 1) / T;
        auto& grad = workspace.grad_buffer(c);
        grad.assign(params.size(), 0.0);
        auto& rep = partial[static_cast<std::size_t>(c)];
        for (std::size_t pos = lo; pos < hi; ++pos) {
            const std::size_t idx = batch_indices[pos];
            try {
                LossReport r =
                    sequence_nll_grad(params, spec, data[idx], config,
                                      Rng::stream(stream_seed, idx), grad, workspace.tape(c), weight);
                per_seq[pos] = r.total_nll;
                rep.event_term += r.event_term;
                rep.integral_term += r.integral_term;
                rep.clamped_events += r.clamped_events;
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(c)] =
                    "sequence " + std::to_string(idx) + ": " + e.what();
                return;
            }
        }
    };

    if (T == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(T));
        for (int c = 0; c < T; ++c) pool.emplace_back(worker, c);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors) {
        if (!err.empty()) throw std::runtime_error("batch_loss_and_grad: " + err);
    }

    // Ordered reduction over thread buffers keeps the result reproducible.
    std::fill(grad_mean.begin(), grad_mean.end(), 0.0);
    for (int c = 0; c < T; ++c) {
        const auto& g = workspace.grad_buffer(c);
        for (std::size_t i = 0; i < grad_mean.size(); ++i) grad_mean[i] += g[i];
    }

    LossReport rep;
    for (int c = 0; c < T; ++c) {
        rep.event_term += partial[static_cast<std::size_t>(c)].event_term;
        rep.integral_term += partial[static_cast<std::size_t>(c)].integral_term;
        rep.clamped_events += partial[static_cast<std::size_t>(c)].clamped_events;
    }
    rep.event_term *= weight;
    rep.integral_term *= weight;
    rep.total_nll = rep.integral_term - rep.event_term;
    rep.per_sequence_nll = std::move(per_seq);
    return rep;
}

double dataset_mean_nll(std::span<const EventSequence> data, const ParamStore& params,
                        const ModelSpec& spec, const NLLConfig& config, std::uint64_t stream_seed,
                        int threads) {
    if (data.empty()) throw std::invalid_argument("dataset_mean_nll: empty dataset");
    if (threads < 1) threads = 1;
    const std::size_t n = data.size();
    std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
    std::vector<std::string> errors(static_cast<std::size_t>(threads));

    auto worker = [&](int c) {
        const std::size_t lo = n * static_cast<std::size_t>(c) / threads;
        const std::size_t hi = n * (static_cast<std::size_t>(c) + 1) / threads;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            try {
                sum += sequence_nll(params, spec, data[i], config, Rng::stream(stream_seed, i))
                           .total_nll;
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(c)] =
                    "sequence " + std::to_string(i) + ": " + e.what();
                return;
            }
        }
        partial[static_cast<std::size_t>(c)] = sum;
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int c = 0; c < threads; ++c) pool.emplace_back(worker, c);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors) {
        if (!err.empty()) throw std::runtime_error("dataset_mean_nll: " + err);
    }
    double sum = 0.0;
    for (double p : partial) sum += p;
    return sum / static_cast<double>(n);
}

}  // namespace snmpp
