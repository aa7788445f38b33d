#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "snmpp/dataset.hpp"
#include "snmpp/likelihood.hpp"
#include "snmpp/model.hpp"
#include "snmpp/predict.hpp"
#include "snmpp/simulate.hpp"
#include "snmpp/train.hpp"

namespace py = pybind11;
using namespace snmpp;

namespace {

ModelSpec make_spec(int num_types, int embedding_dim, std::vector<int> psi_hidden,
                    std::vector<int> phi_hidden, double smoothness, const std::string& link,
                    double link_beta) {
    ModelSpec spec;
    spec.num_types = num_types;
    spec.embedding_dim = embedding_dim;
    spec.psi_hidden = std::move(psi_hidden);
    spec.phi_hidden = std::move(phi_hidden);
    spec.clip_smoothness = smoothness;
    spec.link.kind = link_kind_from_string(link);
    spec.link.beta = link_beta;
    spec.validate();
    return spec;
}

// Parameter snapshot plus spec; the Python-facing model handle.
struct Model {
    ModelSpec spec;
    ParamStore params;

    double intensity(int k, double t, const EventSequence& history) const {
        ValueParams pv(params, spec);
        ValueEvaluator ev(spec, params.layout(), pv);
        return ev.intensity(k, t, history.history_before(t));
    }
    double influence(int src, int tgt, double dt) const {
        ValueParams pv(params, spec);
        ValueEvaluator ev(spec, params.layout(), pv);
        return ev.influence(src, tgt, dt);
    }
    double psi(int src, int tgt) const {
        ValueParams pv(params, spec);
        ValueEvaluator ev(spec, params.layout(), pv);
        return ev.psi(src, tgt);
    }
    double delay(int src, int tgt) const {
        ValueParams pv(params, spec);
        return pv.constrained(params.layout().delay(src, tgt));
    }
    std::vector<double> baselines_post_link() const {
        std::vector<double> out;
        for (int k = 0; k < spec.num_types; ++k) {
            const double a = params.raw()[params.layout().baseline(k)];
            out.push_back(spec.link.kind == LinkKind::softplus_beta ? softplus(a, spec.link.beta)
                                                                    : elu_plus_one(a));
        }
        return out;
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "structured neural marked point process toolkit";

    py::class_<Event>(m, "Event")
        .def(py::init<double, int>(), py::arg("t"), py::arg("k"))
        .def_readwrite("t", &Event::t)
        .def_readwrite("k", &Event::k)
        .def("__repr__", [](const Event& e) {
            return "Event(t=" + std::to_string(e.t) + ", k=" + std::to_string(e.k) + ")";
        });

    py::class_<EventSequence>(m, "EventSequence")
        .def(py::init([](std::vector<std::pair<double, int>> events, double horizon) {
                 EventSequence seq;
                 seq.horizon = horizon;
                 for (auto& [t, k] : events) seq.events.push_back({t, k});
                 seq.validate();
                 return seq;
             }),
             py::arg("events"), py::arg("horizon"))
        .def_readonly("events", &EventSequence::events)
        .def_property_readonly("horizon", [](const EventSequence& s) { return s.horizon; })
        .def("__len__", &EventSequence::size);

    m.def("load_sequences", &load_sequences, py::arg("path"), py::arg("num_types") = -1);
    m.def("save_sequences", &save_sequences, py::arg("path"), py::arg("data"));

    m.def(
        "simulate",
        [](const std::string& generator, std::size_t count, std::uint64_t seed) {
            if (generator == "pp1") return sample_dataset(pp1_process(), count, seed);
            if (generator == "pp2") return sample_dataset(pp2_process(), count, seed);
            if (generator == "supply-chain")
                return sample_supply_chain_dataset(SupplyChainConfig{}, count, seed);
            throw std::invalid_argument("unknown generator: " + generator);
        },
        py::arg("generator"), py::arg("count"), py::arg("seed") = 0,
        "Simulate sequences from pp1 | pp2 | supply-chain with default settings.");

    m.def(
        "simulate_homogeneous",
        [](std::vector<double> rates, double horizon, std::size_t count, std::uint64_t seed) {
            return sample_dataset(homogeneous_process(std::move(rates), horizon), count, seed);
        },
        py::arg("rates"), py::arg("horizon"), py::arg("count"), py::arg("seed") = 0);

    py::class_<Model>(m, "Model")
        .def_property_readonly("num_types", [](const Model& m_) { return m_.spec.num_types; })
        .def("intensity", &Model::intensity, py::arg("k"), py::arg("t"), py::arg("history"),
             "Conditional intensity of type k at time t given the events before t.")
        .def("influence", &Model::influence, py::arg("src"), py::arg("tgt"), py::arg("dt"))
        .def("psi", &Model::psi, py::arg("src"), py::arg("tgt"))
        .def("delay", &Model::delay, py::arg("src"), py::arg("tgt"))
        .def("baselines", &Model::baselines_post_link)
        .def("save", [](const Model& m_, const std::string& path) {
            save_checkpoint(path, m_.spec, m_.params);
        })
        .def(
            "kernel_curves",
            [](const Model& m_, double dt_max, int points) {
                std::vector<double> grid;
                for (int i = 0; i < points; ++i)
                    grid.push_back(dt_max * static_cast<double>(i) / (points - 1));
                auto curves = export_kernel_curves(m_.params, m_.spec, grid);
                py::dict out;
                for (auto& c : curves) {
                    out[py::make_tuple(c.src, c.tgt)] = py::make_tuple(c.dt, c.f);
                }
                return out;
            },
            py::arg("dt_max") = 3.0, py::arg("points") = 200)
        .def("sequence_nll", [](const Model& m_, const EventSequence& seq, int q,
                                std::uint64_t seed) {
            NLLConfig cfg;
            cfg.segments = q;
            LossReport rep = sequence_nll(m_.params, m_.spec, seq, cfg, Rng(seed));
            return py::dict(py::arg("total_nll") = rep.total_nll,
                            py::arg("event_term") = rep.event_term,
                            py::arg("integral_term") = rep.integral_term);
        }, py::arg("seq"), py::arg("q") = 4, py::arg("seed") = 0);

    m.def("load_model", [](const std::string& path) {
        auto [spec, params] = load_checkpoint(path);
        return Model{spec, std::move(params)};
    });

    m.def(
        "train",
        [](const std::vector<EventSequence>& train_data, const std::vector<EventSequence>& val_data,
           int num_types, int epochs, int batch_size, double learning_rate, int q,
           const std::string& estimator, const std::string& link, double link_beta,
           std::uint64_t seed, int patience, int threads, int embedding_dim, double smoothness,
           const std::function<void(py::dict)>& on_epoch) {
            ModelSpec spec = make_spec(num_types, embedding_dim, {16, 16}, {16, 16}, smoothness,
                                       link, link_beta);
            TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.patience = patience;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.optimizer.batch_size = batch_size;
            cfg.optimizer.learning_rate = learning_rate;
            cfg.nll.segments = q;
            cfg.nll.estimator =
                estimator == "global-gmce" ? Estimator::global_gmce : Estimator::stratified;
            std::function<void(const EpochStats&)> cb;
            if (on_epoch) {
                cb = [on_epoch](const EpochStats& s) {
                    py::gil_scoped_acquire gil;
                    on_epoch(py::dict(py::arg("epoch") = s.epoch,
                                      py::arg("train_nll") = s.train_nll,
                                      py::arg("val_nll") = s.val_nll,
                                      py::arg("wall_seconds") = s.wall_seconds));
                };
            }
            TrainResult result;
            {
                py::gil_scoped_release release;
                result = train_model(spec, train_data, val_data, cfg, cb);
            }
            py::dict info(py::arg("best_epoch") = result.best_epoch,
                          py::arg("best_val_nll") = result.best_val_nll,
                          py::arg("epochs_run") = result.epochs_run,
                          py::arg("diverged") = result.diverged);
            return py::make_tuple(Model{spec, std::move(result.best_params)}, info);
        },
        py::arg("train_data"), py::arg("val_data"), py::arg("num_types"), py::arg("epochs") = 100,
        py::arg("batch_size") = 128, py::arg("learning_rate") = 1e-3, py::arg("q") = 4,
        py::arg("estimator") = "stratified", py::arg("link") = "softplus",
        py::arg("link_beta") = 10.0, py::arg("seed") = 0, py::arg("patience") = 15,
        py::arg("threads") = 0, py::arg("embedding_dim") = 4, py::arg("smoothness") = 0.1,
        py::arg("on_epoch") = nullptr,
        "Train by stratified-MC maximum likelihood; returns (model, info).");

    m.def(
        "evaluate",
        [](const Model& model, const std::vector<EventSequence>& data, double mean_gap,
           double multiplier, int grid, int threads) {
            PredictConfig cfg;
            cfg.multiplier = multiplier;
            cfg.inner_grid = grid;
            cfg.outer_grid = grid;
            if (mean_gap <= 0.0) mean_gap = pooled_mean_gap(data);
            EvalReport rep;
            {
                py::gil_scoped_release release;
                rep = evaluate(data, model.params, model.spec, cfg, mean_gap, threads);
            }
            return py::dict(py::arg("time_rmse") = rep.time_rmse,
                            py::arg("type_error_rate") = rep.type_error_rate,
                            py::arg("n_events") = rep.n_events,
                            py::arg("n_skipped_sequences") = rep.n_skipped_sequences);
        },
        py::arg("model"), py::arg("data"), py::arg("mean_gap") = 0.0, py::arg("multiplier") = 10.0,
        py::arg("grid") = 256, py::arg("threads") = 0);

    m.def(
        "expected_next_time",
        [](const Model& model, const EventSequence& history, double mean_gap, double multiplier,
           int grid) {
            PredictConfig cfg;
            cfg.multiplier = multiplier;
            cfg.inner_grid = grid;
            cfg.outer_grid = grid;
            const double t_last = history.empty() ? 0.0 : history.events.back().t;
            return expected_next_time(model.params, model.spec, history.events, t_last, cfg,
                                      mean_gap);
        },
        py::arg("model"), py::arg("history"), py::arg("mean_gap"), py::arg("multiplier") = 10.0,
        py::arg("grid") = 256);

    m.def(
        "predict_type",
        [](const Model& model, const EventSequence& history, double t_hat) {
            return predict_type(model.params, model.spec, history.events, t_hat);
        },
        py::arg("model"), py::arg("history"), py::arg("t_hat"));

    // low-level numeric pieces, mostly for inspection and tests
    m.def("soft_clip", [](double x, double a, double b, double s) { return soft_clip(x, a, b, s); },
          py::arg("x"), py::arg("a") = 0.0, py::arg("b") = 1.0, py::arg("s") = 0.1);
    m.def("softplus", [](double x, double beta) { return softplus(x, beta); }, py::arg("x"),
          py::arg("beta") = 1.0);
}
