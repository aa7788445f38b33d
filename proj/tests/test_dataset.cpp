#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "snmpp/dataset.hpp"
#include "snmpp/params.hpp"
#include "snmpp/rng.hpp"
#include "snmpp/scalar_math.hpp"

using namespace snmpp;

TEST_SUITE("dataset") {

TEST_CASE("sequences round-trip through JSONL exactly") {
    Rng rng(2028);
    std::vector<EventSequence> data;
    for (int s = 0; s < 20; ++s) {
        EventSequence seq;
        seq.horizon = rng.uniform(5.0, 50.0);
        double t = 0.0;
        while (true) {
            t += rng.exponential(1.3);
            if (t >= seq.horizon) break;
            seq.events.push_back({t, static_cast<int>(rng.below(3))});
        }
        data.push_back(std::move(seq));
    }
    const std::string path =
        (std::filesystem::temp_directory_path() / "snmpp_roundtrip.jsonl").string();
    save_sequences(path, data);
    auto loaded = load_sequences(path, 3);
    REQUIRE(loaded.size() == data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        CHECK(loaded[s].horizon == data[s].horizon);
        REQUIRE(loaded[s].size() == data[s].size());
        for (std::size_t i = 0; i < data[s].size(); ++i) {
            CHECK(loaded[s].events[i].t == data[s].events[i].t);  // bit-exact
            CHECK(loaded[s].events[i].k == data[s].events[i].k);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("loader rejects malformed sequences") {
    CHECK_THROWS(sequence_from_json_line(R"({"T": 10, "events": [{"t": 2, "k": 0}, {"t": 1, "k": 0}]})"));
    CHECK_THROWS(sequence_from_json_line(R"({"T": 10, "events": [{"t": 1, "k": 0}, {"t": 1, "k": 1}]})"));
    CHECK_THROWS(sequence_from_json_line(R"({"T": 10, "events": [{"t": 11, "k": 0}]})"));
    CHECK_THROWS(sequence_from_json_line(R"({"T": 10, "events": [{"t": 1, "k": 7}]})", 2));
    CHECK_THROWS(sequence_from_json_line(R"({"T": -1, "events": []})"));
    CHECK_THROWS(sequence_from_json_line(R"(not json)"));
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    ModelSpec spec;
    spec.num_types = 3;
    spec.link.kind = LinkKind::elu_plus_one;
    ParamStore params(spec);
    Rng rng(5);
    params.init(spec, rng);

    const std::string path =
        (std::filesystem::temp_directory_path() / "snmpp_ckpt.bin").string();
    save_checkpoint(path, spec, params);
    auto [spec2, params2] = load_checkpoint(path);
    CHECK(spec2.num_types == 3);
    CHECK(spec2.embedding_dim == spec.embedding_dim);
    CHECK(spec2.link.kind == LinkKind::elu_plus_one);
    CHECK(spec2.psi_hidden == spec.psi_hidden);
    CHECK(spec2.clip_smoothness == spec.clip_smoothness);
    REQUIRE(params2.size() == params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(params2.raw()[i] == params.raw()[i]);
    }
    std::remove(path.c_str());
}

TEST_CASE("parameter layout covers the store exactly once") {
    ModelSpec spec;
    spec.num_types = 4;
    ParamLayout L(spec);
    const Slice* slices[] = {&L.embeddings(),      &L.baselines(),  &L.delay_raw(),
                             &L.psi_weights(),     &L.phi_weights_raw(), &L.phi_biases()};
    std::size_t at = 0;
    for (const Slice* s : slices) {
        CHECK(s->offset == at);
        at += s->size;
    }
    CHECK(at == L.total());
    CHECK(L.embeddings().size == 16);
    CHECK(L.delay_raw().size == 16);
    CHECK(L.baselines().size == 4);
}

TEST_CASE("softplus views of fresh parameters are strictly positive") {
    ModelSpec spec;
    ParamStore p(spec);
    Rng rng(6);
    p.init(spec, rng);
    const auto& L = p.layout();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (L.is_softplus_reparam(i)) {
            CHECK(softplus(p.raw()[i], 1.0) > 0.0);
        }
    }
    // delay init lands at softplus(-2) ~ 0.127
    CHECK(softplus(p.raw()[L.delay(0, 1)], 1.0) == doctest::Approx(0.126928).epsilon(1e-4));
}

}  // TEST_SUITE
