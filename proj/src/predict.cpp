#include "snmpp/predict.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace snmpp {

double expected_next_gap(const std::function<double(double)>& total_intensity_at_lag,
                         double horizon, int inner_grid, int outer_grid) {
    if (!(horizon > 0.0)) throw std::invalid_argument("expected_next_gap: horizon must be > 0");
    if (inner_grid < 2 || outer_grid < 2)
        throw std::invalid_argument("expected_next_gap: grids must have >= 2 points");

    // Cumulative intensity on the inner grid.
    const double du = horizon / (inner_grid - 1);
    std::vector<double> cum(static_cast<std::size_t>(inner_grid), 0.0);
    double prev_lam = total_intensity_at_lag(0.0);
    for (int i = 1; i < inner_grid; ++i) {
        const double lam = total_intensity_at_lag(i * du);
        if (!std::isfinite(lam) || !std::isfinite(prev_lam)) {
            throw std::runtime_error("expected_next_gap: non-finite intensity at lag " +
                                     std::to_string(i * du));
        }
        cum[static_cast<std::size_t>(i)] =
            cum[static_cast<std::size_t>(i - 1)] + 0.5 * (prev_lam + lam) * du;
        prev_lam = lam;
    }

    auto cum_at = [&](double u) {
        const double x = u / du;
        int lo = static_cast<int>(x);
        if (lo >= inner_grid - 1) return cum.back();
        const double frac = x - lo;
        return cum[static_cast<std::size_t>(lo)] * (1.0 - frac) +
               cum[static_cast<std::size_t>(lo + 1)] * frac;
    };

    // Survival integral on the outer grid.
    const double dv = horizon / (outer_grid - 1);
    double total = 0.5 * (std::exp(-cum_at(0.0)) + std::exp(-cum_at(horizon)));
    for (int j = 1; j + 1 < outer_grid; ++j) {
        total += std::exp(-cum_at(j * dv));
    }
    return total * dv;
}

int argmax_type(std::span<const double> lambdas) {
    if (lambdas.empty()) throw std::invalid_argument("argmax_type: empty intensity vector");
    int best = 0;
    for (int k = 1; k < static_cast<int>(lambdas.size()); ++k) {
        if (lambdas[static_cast<std::size_t>(k)] > lambdas[static_cast<std::size_t>(best)]) {
            best = k;
        }
    }
    return best;
}

namespace {

double model_expected_gap(const ValueEvaluator& ev, std::span<const Event> history, double t_last,
                          const PredictConfig& config, double mean_gap) {
    config.validate();
    const double horizon = config.multiplier * mean_gap;
    const int K = ev.spec().num_types;
    auto total = [&](double u) {
        const double t = t_last + u;
        double sum = 0.0;
        // right limit: at u = 0 the event at t_last is already in the history
        for (int k = 0; k < K; ++k) sum += ev.intensity_right_limit(k, t, history);
        return sum;
    };
    return expected_next_gap(total, horizon, config.inner_grid, config.outer_grid);
}

int model_predict_type(const ValueEvaluator& ev, std::span<const Event> history, double t_hat) {
    const int K = ev.spec().num_types;
    std::vector<double> lams(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) lams[static_cast<std::size_t>(k)] = ev.intensity(k, t_hat, history);
    return argmax_type(lams);
}

}  // namespace

double expected_next_time(const ParamStore& params, const ModelSpec& spec,
                          std::span<const Event> history, double t_last,
                          const PredictConfig& config, double mean_gap) {
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    return t_last + model_expected_gap(ev, history, t_last, config, mean_gap);
}

int predict_type(const ParamStore& params, const ModelSpec& spec, std::span<const Event> history,
                 double t_hat) {
    if (!history.empty() && !(t_hat > history.back().t)) {
        throw std::invalid_argument("predict_type: t_hat must be after the last history event");
    }
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    return model_predict_type(ev, history, t_hat);
}

EvalReport evaluate_with_predictor(std::span<const EventSequence> data, const Predictor& predict,
                                   bool keep_per_event) {
    if (data.empty()) throw std::invalid_argument("evaluate: empty test set");
    EvalReport rep;
    double sq_sum = 0.0;
    std::size_t wrong = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const EventSequence& seq = data[s];
        if (seq.empty()) {
            ++rep.n_skipped_sequences;
            continue;
        }
        for (std::size_t n = 0; n < seq.size(); ++n) {
            auto [t_hat, k_hat] = predict(seq, n);
            const Event& truth = seq.events[n];
            const double r = t_hat - truth.t;
            sq_sum += r * r;
            wrong += k_hat != truth.k ? 1 : 0;
            ++rep.n_events;
            if (keep_per_event) {
                rep.per_event.push_back({s, n, truth.t, t_hat, truth.k, k_hat});
            }
        }
    }
    if (rep.n_events == 0) throw std::invalid_argument("evaluate: no events to predict");
    rep.time_rmse = std::sqrt(sq_sum / static_cast<double>(rep.n_events));
    rep.type_error_rate = static_cast<double>(wrong) / static_cast<double>(rep.n_events);
    return rep;
}

EvalReport evaluate(std::span<const EventSequence> data, const ParamStore& params,
                    const ModelSpec& spec, const PredictConfig& config, double mean_gap,
                    int threads, bool keep_per_event) {
    if (data.empty()) throw std::invalid_argument("evaluate: empty test set");
    config.validate();
    if (threads < 1) threads = 1;

    // Predictions per (sequence, event); computed in parallel, combined in order.
    std::vector<std::vector<std::pair<double, int>>> preds(data.size());
    std::vector<std::string> errors(static_cast<std::size_t>(threads));
    auto worker = [&](int c) {
        try {
            ValueParams pv(params, spec);
            ValueEvaluator ev(spec, params.layout(), pv);
            for (std::size_t s = static_cast<std::size_t>(c); s < data.size();
                 s += static_cast<std::size_t>(threads)) {
                const EventSequence& seq = data[s];
                auto& out = preds[s];
                out.resize(seq.size());
                for (std::size_t n = 0; n < seq.size(); ++n) {
                    std::span<const Event> hist{seq.events.data(), n};
                    const double t_last = n > 0 ? seq.events[n - 1].t : 0.0;
                    const double gap = model_expected_gap(ev, hist, t_last, config, mean_gap);
                    const double t_hat = t_last + gap;
                    out[n] = {t_hat, model_predict_type(ev, hist, t_hat)};
                }
            }
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(c)] = e.what();
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int c = 0; c < threads; ++c) pool.emplace_back(worker, c);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors) {
        if (!err.empty()) throw std::runtime_error("evaluate: " + err);
    }

    std::size_t seq_index = 0;
    auto lookup = [&preds, &data, &seq_index](const EventSequence& seq, std::size_t n) {
        // Sequences are visited in order; resynchronize by address.
        while (&data[seq_index] != &seq) ++seq_index;
        return preds[seq_index][n];
    };
    return evaluate_with_predictor(data, lookup, keep_per_event);
}

void write_per_event_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("evaluate: cannot open for writing: " + path);
    out << "seq,idx,t_true,t_pred,k_true,k_pred\n";
    char buf[32];
    auto fmt = [&buf](double x) {
        auto res = std::to_chars(buf, buf + sizeof(buf), x);
        return std::string(buf, res.ptr);
    };
    for (const auto& pe : report.per_event) {
        out << pe.seq << ',' << pe.idx << ',' << fmt(pe.t_true) << ',' << fmt(pe.t_pred) << ','
            << pe.k_true << ',' << pe.k_pred << '\n';
    }
}

}  // namespace snmpp
