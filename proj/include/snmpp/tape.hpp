#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "snmpp/scalar_math.hpp"

namespace snmpp {

enum class Op : std::uint8_t {
    leaf,
    constant,
    add,
    sub,
    mul,
    div,
    neg,
    log,
    exp,
    abs,
    sin,
    softplus,
    gelu,
    sigmoid,
    soft_clip,
    link,
};

using NodeId = std::int32_t;

// Scalar reverse-mode tape. Each node records its value, up to two parent
// ids and the matching local gradients, computed at record time; the
// backward pass is one generic sweep in decreasing id order.
//
// Leaves (registered parameters) must be recorded first and occupy ids
// [0, num_leaves()). Node ids are topologically ordered by construction.
class Tape {
public:
    struct Node {
        double value;
        double g0;
        double g1;
        NodeId p0;
        NodeId p1;
        Op tag;
    };

    Tape() = default;

    void reserve(std::size_t n) { nodes_.reserve(n); }
    std::size_t size() const { return nodes_.size(); }
    NodeId num_leaves() const { return num_leaves_; }

    void clear() {
        nodes_.clear();
        num_leaves_ = 0;
    }

    // Drops every node with id >= n. Used to flush partial results while
    // keeping leaves and cached subexpressions alive.
    void truncate(std::size_t n) { nodes_.resize(n); }

    // Registers a parameter leaf; only valid while the tape holds leaves only.
    NodeId leaf(double value);

    // General node recording; validates that parents are on the tape.
    NodeId record(Op tag, double value, std::span<const NodeId> parents,
                  std::span<const double> local_grads);

    double value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    Op tag(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].tag; }
    std::array<NodeId, 2> parents(NodeId id) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        return {n.p0, n.p1};
    }
    std::array<double, 2> local_grads(NodeId id) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        return {n.g0, n.g1};
    }

    // Reverse sweep from `loss`; accumulates d(loss)/d(leaf) into leaf_grad
    // (which must have num_leaves() entries). Non-leaf adjoints are workspace.
    void backward_accumulate(NodeId loss, std::span<double> leaf_grad);

    // Convenience form returning a fresh gradient vector.
    std::vector<double> backward(NodeId loss);

    // Fast internal recording paths (parents assumed valid).
    NodeId push0(Op tag, double value) {
        nodes_.push_back({value, 0.0, 0.0, -1, -1, tag});
        return static_cast<NodeId>(nodes_.size() - 1);
    }
    NodeId push1(Op tag, double value, NodeId p, double g) {
        nodes_.push_back({value, g, 0.0, p, -1, tag});
        return static_cast<NodeId>(nodes_.size() - 1);
    }
    NodeId push2(Op tag, double value, NodeId p0, double g0, NodeId p1, double g1) {
        nodes_.push_back({value, g0, g1, p0, p1, tag});
        return static_cast<NodeId>(nodes_.size() - 1);
    }

private:
    std::vector<Node> nodes_;
    std::vector<double> adjoint_;  // backward workspace, reused
    NodeId num_leaves_ = 0;
};

// Handle to a tape node with value semantics and operator overloads.
// Operations with plain doubles fold the constant into the local gradient
// instead of materializing a constant node.
struct Var {
    Tape* tape = nullptr;
    NodeId id = -1;

    double value() const { return tape->value(id); }
};

inline Var make_constant(Tape& t, double v) {
    return {&t, t.push0(Op::constant, v)};
}

inline Var operator+(Var a, Var b) {
    return {a.tape, a.tape->push2(Op::add, a.value() + b.value(), a.id, 1.0, b.id, 1.0)};
}
inline Var operator+(Var a, double c) {
    return {a.tape, a.tape->push1(Op::add, a.value() + c, a.id, 1.0)};
}
inline Var operator+(double c, Var a) { return a + c; }

inline Var operator-(Var a, Var b) {
    return {a.tape, a.tape->push2(Op::sub, a.value() - b.value(), a.id, 1.0, b.id, -1.0)};
}
inline Var operator-(Var a, double c) {
    return {a.tape, a.tape->push1(Op::sub, a.value() - c, a.id, 1.0)};
}
inline Var operator-(double c, Var a) {
    return {a.tape, a.tape->push1(Op::sub, c - a.value(), a.id, -1.0)};
}
inline Var operator-(Var a) {
    return {a.tape, a.tape->push1(Op::neg, -a.value(), a.id, -1.0)};
}

inline Var operator*(Var a, Var b) {
    return {a.tape,
            a.tape->push2(Op::mul, a.value() * b.value(), a.id, b.value(), b.id, a.value())};
}
inline Var operator*(Var a, double c) {
    return {a.tape, a.tape->push1(Op::mul, a.value() * c, a.id, c)};
}
inline Var operator*(double c, Var a) { return a * c; }

inline Var operator/(Var a, Var b) {
    const double bv = b.value();
    return {a.tape, a.tape->push2(Op::div, a.value() / bv, a.id, 1.0 / bv, b.id,
                                  -a.value() / (bv * bv))};
}
inline Var operator/(Var a, double c) { return a * (1.0 / c); }
inline Var operator/(double c, Var a) {
    const double av = a.value();
    return {a.tape, a.tape->push1(Op::div, c / av, a.id, -c / (av * av))};
}

inline Var log(Var a) {
    return {a.tape, a.tape->push1(Op::log, std::log(a.value()), a.id, 1.0 / a.value())};
}
inline Var exp(Var a) {
    const double e = std::exp(a.value());
    return {a.tape, a.tape->push1(Op::exp, e, a.id, e)};
}
inline Var sin(Var a) {
    return {a.tape, a.tape->push1(Op::sin, std::sin(a.value()), a.id, std::cos(a.value()))};
}

// |x| with subgradient 0 at x = 0.
inline Var abs(Var a) {
    const double v = a.value();
    const double g = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    return {a.tape, a.tape->push1(Op::abs, std::fabs(v), a.id, g)};
}

inline Var softplus(Var a, double beta) {
    return {a.tape, a.tape->push1(Op::softplus, softplus(a.value(), beta), a.id,
                                  softplus_grad(a.value(), beta))};
}
inline Var gelu(Var a) {
    return {a.tape, a.tape->push1(Op::gelu, gelu(a.value()), a.id, gelu_grad(a.value()))};
}
inline Var soft_clip(Var a, double lo, double hi, double s) {
    return {a.tape, a.tape->push1(Op::soft_clip, soft_clip(a.value(), lo, hi, s), a.id,
                                  soft_clip_grad(a.value(), lo, hi, s))};
}
inline Var elu_plus_one(Var a) {
    return {a.tape, a.tape->push1(Op::link, elu_plus_one(a.value()), a.id,
                                  elu_plus_one_grad(a.value()))};
}

}  // namespace snmpp
