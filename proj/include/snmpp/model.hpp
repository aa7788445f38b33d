#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "snmpp/events.hpp"
#include "snmpp/model_spec.hpp"
#include "snmpp/params.hpp"
#include "snmpp/tape.hpp"

namespace snmpp {

// double counterparts of the Var ops so the evaluator template reads the same
// in both instantiations.
inline double abs(double x) { return std::fabs(x); }
inline double log(double x) { return std::log(x); }
inline double make_scalar(double v, double) { return v; }
inline Var make_scalar(double v, Var like) { return make_constant(*like.tape, v); }
inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

// Plain-double parameter view with the softplus-constrained slices
// materialized once.
class ValueParams {
public:
    using scalar = double;

    ValueParams(const ParamStore& store, const ModelSpec& spec);

    double unconstrained(std::size_t i) const { return raw_[i]; }
    double constrained(std::size_t i) const { return view_[i]; }

private:
    std::vector<double> raw_;
    std::vector<double> view_;
};

// Tape-backed parameter view: registers every raw parameter as a leaf and
// builds the softplus view nodes once per tape (they survive truncation as
// long as the caller truncates above the view region).
class TapeParams {
public:
    using scalar = Var;

    TapeParams(Tape& tape, const ParamStore& store, const ModelSpec& spec);

    Var unconstrained(std::size_t i) const { return leaves_[i]; }
    Var constrained(std::size_t i) const { return views_[i]; }
    Tape& tape() const { return *tape_; }

private:
    Tape* tape_;
    std::vector<Var> leaves_;
    std::vector<Var> views_;
};

// Evaluates the influence kernel and conditional intensity for a fixed
// parameter snapshot. The interaction values psi(src, tgt), the delays and
// the embedding part of phi's first layer depend only on the type pair, so
// they are computed once per evaluator for all K^2 pairs.
template <class PV>
class Evaluator {
public:
    using S = typename PV::scalar;

    Evaluator(const ModelSpec& spec, const ParamLayout& layout, const PV& pv)
        : spec_(&spec), layout_(&layout), pv_(&pv) {
        const int K = spec.num_types;
        const auto& shapes = layout.phi_shapes();
        const int h0 = shapes.front().out;
        const int time_in = 2 * spec.embedding_dim;

        // Flat handles into the phi weights keep layout arithmetic out of the
        // per-evaluation loops.
        phi_time_w_.reserve(static_cast<std::size_t>(h0));
        for (int h = 0; h < h0; ++h) {
            phi_time_w_.push_back(pv.constrained(layout.phi_weight(0, h, time_in)));
        }
        for (std::size_t layer = 1; layer < shapes.size(); ++layer) {
            const auto& shape = shapes[layer];
            std::vector<S> w;
            w.reserve(static_cast<std::size_t>(shape.out) * shape.in);
            std::vector<S> b;
            b.reserve(static_cast<std::size_t>(shape.out));
            for (int o = 0; o < shape.out; ++o) {
                for (int i = 0; i < shape.in; ++i) {
                    w.push_back(pv.constrained(layout.phi_weight(static_cast<int>(layer), o, i)));
                }
                b.push_back(pv.unconstrained(layout.phi_bias(static_cast<int>(layer), o)));
            }
            phi_w_.push_back(std::move(w));
            phi_b_.push_back(std::move(b));
        }

        psi_.reserve(static_cast<std::size_t>(K) * K);
        delay_.reserve(static_cast<std::size_t>(K) * K);
        phi_l1_.reserve(static_cast<std::size_t>(K) * K * h0);
        for (int src = 0; src < K; ++src) {
            for (int tgt = 0; tgt < K; ++tgt) {
                psi_.push_back(eval_psi(src, tgt));
                delay_.push_back(pv.constrained(layout.delay(src, tgt)));
                build_phi_l1_partial(src, tgt);
            }
        }
    }

    const S& psi(int src, int tgt) const {
        return psi_[static_cast<std::size_t>(src) * spec_->num_types + tgt];
    }
    const S& delay(int src, int tgt) const {
        return delay_[static_cast<std::size_t>(src) * spec_->num_types + tgt];
    }

    // Monotone temporal network at shifted lag u >= 0, soft-clipped output.
    S phi(int src, int tgt, const S& u) const {
        const auto& shapes = layout_->phi_shapes();
        const int h0 = shapes.front().out;
        const S* part = phi_l1_.data() +
                        (static_cast<std::size_t>(src) * spec_->num_types + tgt) * h0;

        std::vector<S>& act = scratch_a_;
        act.clear();
        for (int h = 0; h < h0; ++h) {
            // time channel enters negated: pre = partial - w_time * u
            act.push_back(softplus(part[h] - phi_time_w_[static_cast<std::size_t>(h)] * u, 1.0));
        }
        std::vector<S>& next = scratch_b_;
        const std::size_t hidden_layers = phi_w_.size() - 1;
        for (std::size_t layer = 0; layer < hidden_layers; ++layer) {
            const S* w = phi_w_[layer].data();
            const S* b = phi_b_[layer].data();
            const int in = shapes[layer + 1].in;
            const int out_n = shapes[layer + 1].out;
            next.clear();
            for (int o = 0; o < out_n; ++o) {
                S pre = b[o];
                const S* row = w + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) {
                    pre = pre + row[i] * act[static_cast<std::size_t>(i)];
                }
                next.push_back(softplus(pre, 1.0));
            }
            act.swap(next);
        }
        const S* w = phi_w_.back().data();
        S out = phi_b_.back()[0];
        const int in = shapes.back().in;
        for (int i = 0; i < in; ++i) {
            out = out + w[i] * act[static_cast<std::size_t>(i)];
        }
        return soft_clip(out, spec_->clip_lo, spec_->clip_hi, spec_->clip_smoothness);
    }

    // f_{src->tgt}(dt) = psi(src, tgt) * phi(src, tgt, |dt - d_{src,tgt}|)
    S influence(int src, int tgt, double dt) const {
        S u = abs(dt - delay(src, tgt));
        return psi(src, tgt) * phi(src, tgt, u);
    }

    S intensity_pre_link(int k, double t, std::span<const Event> history,
                         bool closed_boundary = false) const {
        S acc = pv_->unconstrained(layout_->baseline(k));
        for (const Event& e : history) {
            if (e.t > t || (!closed_boundary && e.t == t)) {
                throw std::invalid_argument("intensity: history event at or after evaluation time");
            }
            acc = acc + influence(e.k, k, t - e.t);
        }
        return acc;
    }

    S link(const S& x) const {
        if (spec_->link.kind == LinkKind::softplus_beta) {
            return softplus(x, spec_->link.beta);
        }
        return elu_plus_one(x);
    }

    S intensity(int k, double t, std::span<const Event> history) const {
        return link(intensity_pre_link(k, t, history));
    }

    // lim_{s -> t+} lambda_k(s): history events at exactly t contribute at lag 0.
    S intensity_right_limit(int k, double t, std::span<const Event> history) const {
        return link(intensity_pre_link(k, t, history, true));
    }

    const ModelSpec& spec() const { return *spec_; }
    const ParamLayout& layout() const { return *layout_; }
    const PV& params() const { return *pv_; }

private:
    S eval_psi(int src, int tgt) const {
        const int m = spec_->embedding_dim;
        const auto& shapes = layout_->psi_shapes();
        std::vector<S> act;
        act.reserve(static_cast<std::size_t>(2 * m));
        for (int j = 0; j < m; ++j) act.push_back(pv_->unconstrained(layout_->emb(src, j)));
        for (int j = 0; j < m; ++j) act.push_back(pv_->unconstrained(layout_->emb(tgt, j)));

        std::vector<S> next;
        for (std::size_t layer = 0; layer + 1 < shapes.size(); ++layer) {
            const auto& shape = shapes[layer];
            next.clear();
            next.reserve(static_cast<std::size_t>(shape.out));
            for (int o = 0; o < shape.out; ++o) {
                S pre = pv_->unconstrained(layout_->psi_bias(static_cast<int>(layer), o));
                for (int i = 0; i < shape.in; ++i) {
                    pre = pre + pv_->unconstrained(layout_->psi_weight(static_cast<int>(layer), o, i)) *
                                    act[static_cast<std::size_t>(i)];
                }
                next.push_back(gelu(pre));
            }
            act.swap(next);
        }
        const int head = static_cast<int>(shapes.size()) - 1;
        S out = pv_->unconstrained(layout_->psi_bias(head, 0));
        for (int i = 0; i < shapes.back().in; ++i) {
            out = out + pv_->unconstrained(layout_->psi_weight(head, 0, i)) *
                            act[static_cast<std::size_t>(i)];
        }
        return out;
    }

    // Embedding + bias part of phi's first-layer pre-activation; the -u term
    // is added per evaluation.
    void build_phi_l1_partial(int src, int tgt) {
        const int m = spec_->embedding_dim;
        const int h0 = layout_->phi_shapes().front().out;
        for (int h = 0; h < h0; ++h) {
            S pre = pv_->unconstrained(layout_->phi_bias(0, h));
            for (int j = 0; j < m; ++j) {
                pre = pre + pv_->constrained(layout_->phi_weight(0, h, j)) *
                                pv_->unconstrained(layout_->emb(src, j));
            }
            for (int j = 0; j < m; ++j) {
                pre = pre + pv_->constrained(layout_->phi_weight(0, h, m + j)) *
                                pv_->unconstrained(layout_->emb(tgt, j));
            }
            phi_l1_.push_back(pre);
        }
    }

    const ModelSpec* spec_;
    const ParamLayout* layout_;
    const PV* pv_;
    std::vector<S> psi_;
    std::vector<S> delay_;
    std::vector<S> phi_l1_;
    std::vector<S> phi_time_w_;          // first-layer time-channel weights
    std::vector<std::vector<S>> phi_w_;  // flattened layers after the first
    std::vector<std::vector<S>> phi_b_;
    mutable std::vector<S> scratch_a_;
    mutable std::vector<S> scratch_b_;
};

using ValueEvaluator = Evaluator<ValueParams>;
using TapeEvaluator = Evaluator<TapeParams>;

// Sampled influence-kernel trace for one ordered type pair.
struct KernelCurve {
    int src = 0;
    int tgt = 0;
    std::vector<double> dt;
    std::vector<double> f;
};

// Evaluates influence() pointwise on the grid for all K^2 ordered pairs.
// The grid must be non-empty and strictly increasing.
std::vector<KernelCurve> export_kernel_curves(const ParamStore& params, const ModelSpec& spec,
                                              std::span<const double> grid);

void write_kernel_curves_csv(const std::string& path, const std::vector<KernelCurve>& curves);

// lambda_k(t) for all k over the grid, given a sequence's events as history.
// CSV rows are (t, k, lambda).
void write_intensity_csv(const std::string& path, const ParamStore& params, const ModelSpec& spec,
                         const EventSequence& seq, std::span<const double> grid);

}  // namespace snmpp
