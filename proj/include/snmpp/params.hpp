#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snmpp/model_spec.hpp"
#include "snmpp/rng.hpp"

namespace snmpp {

struct Slice {
    std::size_t offset = 0;
    std::size_t size = 0;
};

// Fixed flat layout of all unconstrained parameters:
//   embeddings [K x m] | baselines [K] | delay_raw [K x K] |
//   psi weights+biases (per layer) | phi weights raw (per layer) | phi biases
// Delays and phi weights are stored unconstrained; the positive views are
// softplus(raw) and are never materialized in the store.
class ParamLayout {
public:
    ParamLayout() = default;
    explicit ParamLayout(const ModelSpec& spec);

    std::size_t total() const { return total_; }
    const Slice& embeddings() const { return embeddings_; }
    const Slice& baselines() const { return baselines_; }
    const Slice& delay_raw() const { return delay_raw_; }
    const Slice& psi_weights() const { return psi_weights_; }
    const Slice& phi_weights_raw() const { return phi_weights_raw_; }
    const Slice& phi_biases() const { return phi_biases_; }

    // True for indices whose constrained view is softplus(raw).
    bool is_softplus_reparam(std::size_t index) const {
        return (index >= delay_raw_.offset && index < delay_raw_.offset + delay_raw_.size) ||
               (index >= phi_weights_raw_.offset &&
                index < phi_weights_raw_.offset + phi_weights_raw_.size);
    }

    std::size_t emb(int k, int j) const {
        return embeddings_.offset + static_cast<std::size_t>(k) * m_ + j;
    }
    std::size_t baseline(int k) const { return baselines_.offset + static_cast<std::size_t>(k); }
    std::size_t delay(int src, int tgt) const {
        return delay_raw_.offset + static_cast<std::size_t>(src) * num_types_ + tgt;
    }

    // psi layer l: weights row-major [out][in] followed by biases [out].
    std::size_t psi_weight(int layer, int out, int in) const {
        const auto& shape = psi_shapes_[static_cast<std::size_t>(layer)];
        return psi_weights_.offset + psi_layer_offset_[static_cast<std::size_t>(layer)] +
               static_cast<std::size_t>(out) * shape.in + in;
    }
    std::size_t psi_bias(int layer, int out) const {
        const auto& shape = psi_shapes_[static_cast<std::size_t>(layer)];
        return psi_weights_.offset + psi_layer_offset_[static_cast<std::size_t>(layer)] +
               static_cast<std::size_t>(shape.out) * shape.in + out;
    }

    // phi layer l: weights row-major in the raw-weight slice, biases in the
    // separate bias slice.
    std::size_t phi_weight(int layer, int out, int in) const {
        const auto& shape = phi_shapes_[static_cast<std::size_t>(layer)];
        return phi_weights_raw_.offset + phi_weight_offset_[static_cast<std::size_t>(layer)] +
               static_cast<std::size_t>(out) * shape.in + in;
    }
    std::size_t phi_bias(int layer, int out) const {
        return phi_biases_.offset + phi_bias_offset_[static_cast<std::size_t>(layer)] + out;
    }

    struct LayerShape {
        int in = 0;
        int out = 0;
    };
    const std::vector<LayerShape>& psi_shapes() const { return psi_shapes_; }
    const std::vector<LayerShape>& phi_shapes() const { return phi_shapes_; }
    int num_types() const { return num_types_; }
    int embedding_dim() const { return m_; }

private:
    int num_types_ = 0;
    int m_ = 0;
    Slice embeddings_, baselines_, delay_raw_, psi_weights_, phi_weights_raw_, phi_biases_;
    std::vector<LayerShape> psi_shapes_, phi_shapes_;
    std::vector<std::size_t> psi_layer_offset_;   // within psi_weights slice
    std::vector<std::size_t> phi_weight_offset_;  // within phi_weights_raw slice
    std::vector<std::size_t> phi_bias_offset_;    // within phi_biases slice
    std::size_t total_ = 0;
};

// Parameter store: the flat unconstrained vector plus AdamW moment state.
class ParamStore {
public:
    ParamStore() = default;
    explicit ParamStore(const ModelSpec& spec) : layout_(spec) {
        raw_.assign(layout_.total(), 0.0);
        m_.assign(layout_.total(), 0.0);
        v_.assign(layout_.total(), 0.0);
    }

    // Random initialization: embeddings uniform in [-0.5, 0.5]; network
    // weights uniform in [-0.5, 0.5] / sqrt(fan-in); biases and baselines 0;
    // delay raw at -2.0 (delay ~ 0.127); phi raw weights shifted down so the
    // effective softplus weights start small and the clipped output starts
    // inside (0, 1), where the soft-clip gradient is alive.
    void init(const ModelSpec& spec, Rng& rng);

    const ParamLayout& layout() const { return layout_; }
    std::vector<double>& raw() { return raw_; }
    const std::vector<double>& raw() const { return raw_; }
    std::vector<double>& moment1() { return m_; }
    std::vector<double>& moment2() { return v_; }
    long step_count() const { return step_count_; }
    void set_step_count(long n) { step_count_ = n; }
    std::size_t size() const { return raw_.size(); }

private:
    ParamLayout layout_;
    std::vector<double> raw_;
    std::vector<double> m_;
    std::vector<double> v_;
    long step_count_ = 0;
};

// Checkpoint file: one JSON header line describing the model and the slice
// layout, followed by the raw parameter vector as little-endian float64.
void save_checkpoint(const std::string& path, const ModelSpec& spec, const ParamStore& params);
std::pair<ModelSpec, ParamStore> load_checkpoint(const std::string& path);

}  // namespace snmpp
