#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace snmpp {

enum class LinkKind {
    softplus_beta,  // (1/beta) log(1 + exp(beta x)); synthetic experiments
    elu_plus_one,   // elu(x) + 1; supply-chain / real-style runs
};

struct LinkSpec {
    LinkKind kind = LinkKind::softplus_beta;
    double beta = 10.0;
};

inline std::string to_string(LinkKind k) {
    return k == LinkKind::softplus_beta ? "softplus" : "elu-plus-one";
}

inline LinkKind link_kind_from_string(const std::string& s) {
    if (s == "softplus") return LinkKind::softplus_beta;
    if (s == "elu-plus-one" || s == "elu") return LinkKind::elu_plus_one;
    throw std::invalid_argument("unknown link kind: " + s);
}

// Architecture of the intensity model: event-type embeddings, the signed
// interaction network psi, and the monotone temporal network phi whose output
// is soft-clipped to [clip_lo, clip_hi].
struct ModelSpec {
    int num_types = 2;       // K
    int embedding_dim = 4;   // m
    std::vector<int> psi_hidden{16, 16};
    std::vector<int> phi_hidden{16, 16};
    double clip_smoothness = 0.1;  // s
    double clip_lo = 0.0;
    double clip_hi = 1.0;
    LinkSpec link;

    void validate() const {
        if (num_types < 1) throw std::invalid_argument("ModelSpec: K must be >= 1");
        if (embedding_dim < 1) throw std::invalid_argument("ModelSpec: m must be >= 1");
        if (!(clip_smoothness > 0.0)) throw std::invalid_argument("ModelSpec: s must be > 0");
        if (!(clip_lo < clip_hi)) throw std::invalid_argument("ModelSpec: clip bounds must satisfy a < b");
        if (psi_hidden.empty() || phi_hidden.empty())
            throw std::invalid_argument("ModelSpec: hidden layers must be non-empty");
        for (int h : psi_hidden)
            if (h < 1) throw std::invalid_argument("ModelSpec: psi hidden sizes must be >= 1");
        for (int h : phi_hidden)
            if (h < 1) throw std::invalid_argument("ModelSpec: phi hidden sizes must be >= 1");
        if (link.kind == LinkKind::softplus_beta && !(link.beta > 0.0))
            throw std::invalid_argument("ModelSpec: link beta must be > 0");
    }
};

}  // namespace snmpp
