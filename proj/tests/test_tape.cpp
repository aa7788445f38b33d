#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "snmpp/rng.hpp"
#include "snmpp/tape.hpp"
#include "test_util.hpp"

using namespace snmpp;

TEST_SUITE("tape") {

TEST_CASE("recording leaves and constants") {
    Tape t;
    NodeId c = t.record(Op::constant, 3.0, {}, {});
    CHECK(c == 0);
    CHECK(t.value(c) == 3.0);
    CHECK(t.size() == 1);
}

TEST_CASE("product node stores the product-rule local gradients") {
    Tape t;
    NodeId a = t.leaf(2.0);
    NodeId b = t.leaf(3.0);
    std::array<NodeId, 2> parents{a, b};
    std::array<double, 2> locals{t.value(b), t.value(a)};
    NodeId m = t.record(Op::mul, 6.0, parents, locals);
    CHECK(t.value(m) == 6.0);
    CHECK(t.local_grads(m)[0] == 3.0);
    CHECK(t.local_grads(m)[1] == 2.0);
}

TEST_CASE("sin node local gradient at 0 is cos(0) = 1") {
    Tape t;
    Var x{&t, t.leaf(0.0)};
    Var y = sin(x);
    CHECK(t.local_grads(y.id)[0] == 1.0);
}

TEST_CASE("record rejects out-of-range parents") {
    Tape t;
    std::array<NodeId, 1> parents{5};
    std::array<double, 1> locals{1.0};
    CHECK_THROWS_AS(t.record(Op::neg, 0.0, parents, locals), std::out_of_range);
}

TEST_CASE("backward: f(x) = x^2 at x = 3") {
    Tape t;
    Var x{&t, t.leaf(3.0)};
    Var y = x * x;
    auto grad = t.backward(y.id);
    CHECK(grad.size() == 1);
    CHECK(grad[0] == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("backward: f(x, y) = x*y + y at (2, 5)") {
    Tape t;
    Var x{&t, t.leaf(2.0)};
    Var y{&t, t.leaf(5.0)};
    Var f = x * y + y;
    auto grad = t.backward(f.id);
    CHECK(grad[0] == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(grad[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("backward rejects a loss node that is not on the tape") {
    Tape t;
    t.leaf(1.0);
    CHECK_THROWS_AS(t.backward(7), std::out_of_range);
}

TEST_CASE("softplus values and asymptotes") {
    CHECK(softplus(0.0, 1.0) == doctest::Approx(0.6931471805599453).epsilon(1e-14));
    CHECK(softplus(10.0, 10.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(softplus(-1000.0, 1.0) == 0.0);
    CHECK(softplus(1000.0, 1.0) == 1000.0);
    CHECK(gelu(0.0) == 0.0);
    // softplus output strictly positive for all finite raw values
    for (double x : {-745.0, -50.0, -2.0, 0.0, 3.0, 700.0}) {
        CHECK(softplus(x, 1.0) >= 0.0);
        if (x > -745.0) CHECK(softplus(x, 1.0) > 0.0);
    }
}

// Composite expression exercising every op; each partial derivative must
// match a central finite difference.
static double composite(const std::vector<double>& v) {
    const double a = v[0], b = v[1], c = v[2];
    double r = softplus(a * b, 2.0);
    r += gelu(a - 0.5) * soft_clip(b + c, 0.0, 1.0, 0.1);
    r += std::sin(a * c) - std::exp(0.3 * c);
    r += std::fabs(b) / (2.0 + a * a);
    r += std::log(softplus(c, 1.0) + 1.0);
    r += elu_plus_one(a + 0.2 * b);
    return r;
}

static Var composite_tape(Tape& t, const std::vector<double>& v) {
    Var a{&t, t.leaf(v[0])};
    Var b{&t, t.leaf(v[1])};
    Var c{&t, t.leaf(v[2])};
    Var r = softplus(a * b, 2.0);
    r = r + gelu(a - 0.5) * soft_clip(b + c, 0.0, 1.0, 0.1);
    r = r + sin(a * c) - exp(0.3 * c);
    r = r + abs(b) / (2.0 + a * a);
    r = r + log(softplus(c, 1.0) + 1.0);
    r = r + elu_plus_one(a + 0.2 * b);
    return r;
}

TEST_CASE("property: reverse-mode gradient matches central differences") {
    Rng rng(12345);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                              rng.uniform(-3.0, 3.0)};
        if (std::fabs(v[1]) < 1e-3) continue;  // |b| near the abs() kink

        Tape t;
        const Var loss = composite_tape(t, v);
        CHECK(loss.value() == doctest::Approx(composite(v)).epsilon(1e-12));
        auto grad = t.backward(loss.id);
        for (std::size_t i = 0; i < 3; ++i) {
            const double fd = test::central_diff(composite, v, i);
            CHECK_MESSAGE(test::close_rel(grad[i], fd, 1e-4, 1e-7),
                          "coord " << i << " ad=" << grad[i] << " fd=" << fd);
        }
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("backward of a sum equals the sum of backward passes") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v{rng.uniform(-2.0, 2.0), rng.uniform(1.0, 3.0),
                              rng.uniform(-2.0, 2.0)};
        Tape t;
        Var x{&t, t.leaf(v[0])};
        Var y{&t, t.leaf(v[1])};
        Var z{&t, t.leaf(v[2])};
        Var f1 = softplus(x * y, 1.0) + sin(z);
        Var f2 = gelu(x) * z - log(y);
        Var sum = f1 + f2;

        auto joint = t.backward(sum.id);
        std::vector<double> split(3, 0.0);
        t.backward_accumulate(f1.id, split);
        t.backward_accumulate(f2.id, split);
        for (int i = 0; i < 3; ++i) {
            CHECK(joint[static_cast<std::size_t>(i)] ==
                  doctest::Approx(split[static_cast<std::size_t>(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("truncate keeps cached prefix nodes usable") {
    Tape t;
    Var x{&t, t.leaf(2.0)};
    Var cache = softplus(x, 1.0);  // survives truncation
    const std::size_t mark = t.size();

    std::vector<double> grad(1, 0.0);
    Var a = cache * cache;
    t.backward_accumulate(a.id, grad);
    t.truncate(mark);
    Var b = cache * 3.0;
    t.backward_accumulate(b.id, grad);

    // d/dx [softplus(x)^2] + d/dx [3 softplus(x)] at x=2
    const double sp = softplus(2.0, 1.0);
    const double sg = softplus_grad(2.0, 1.0);
    CHECK(grad[0] == doctest::Approx(2.0 * sp * sg + 3.0 * sg).epsilon(1e-13));
}

}  // TEST_SUITE
