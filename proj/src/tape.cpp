#include "snmpp/tape.hpp"

#include <stdexcept>

namespace snmpp {

NodeId Tape::leaf(double value) {
    if (size() != static_cast<std::size_t>(num_leaves_)) {
        throw std::logic_error("Tape::leaf: leaves must be registered before other nodes");
    }
    const NodeId id = push0(Op::leaf, value);
    ++num_leaves_;
    return id;
}

NodeId Tape::record(Op tag, double value, std::span<const NodeId> parents,
                    std::span<const double> local_grads) {
    if (parents.size() > 2 || parents.size() != local_grads.size()) {
        throw std::invalid_argument("Tape::record: up to two parents with matching local gradients");
    }
    const NodeId n = static_cast<NodeId>(size());
    for (NodeId p : parents) {
        if (p < 0 || p >= n) {
            throw std::out_of_range("Tape::record: parent id not on tape");
        }
    }
    switch (parents.size()) {
        case 0:
            return push0(tag, value);
        case 1:
            return push1(tag, value, parents[0], local_grads[0]);
        default:
            return push2(tag, value, parents[0], local_grads[0], parents[1], local_grads[1]);
    }
}

void Tape::backward_accumulate(NodeId loss, std::span<double> leaf_grad) {
    if (loss < 0 || static_cast<std::size_t>(loss) >= size()) {
        throw std::out_of_range("Tape::backward: loss node not on tape");
    }
    if (leaf_grad.size() != static_cast<std::size_t>(num_leaves_)) {
        throw std::invalid_argument("Tape::backward: gradient buffer size mismatch");
    }
    const std::size_t n = static_cast<std::size_t>(loss) + 1;
    adjoint_.assign(n, 0.0);
    adjoint_[static_cast<std::size_t>(loss)] = 1.0;

    const Node* nodes = nodes_.data();
    double* adj = adjoint_.data();
    for (std::size_t i = n; i-- > static_cast<std::size_t>(num_leaves_);) {
        const double a = adj[i];
        if (a == 0.0) {
            continue;
        }
        const Node& nd = nodes[i];
        if (nd.p0 >= 0) {
            adj[static_cast<std::size_t>(nd.p0)] += nd.g0 * a;
        }
        if (nd.p1 >= 0) {
            adj[static_cast<std::size_t>(nd.p1)] += nd.g1 * a;
        }
    }
    const std::size_t nl = static_cast<std::size_t>(num_leaves_);
    const std::size_t upto = n < nl ? n : nl;
    for (std::size_t i = 0; i < upto; ++i) {
        leaf_grad[i] += adj[i];
    }
}

std::vector<double> Tape::backward(NodeId loss) {
    std::vector<double> grad(static_cast<std::size_t>(num_leaves_), 0.0);
    backward_accumulate(loss, grad);
    return grad;
}

}  // namespace snmpp
