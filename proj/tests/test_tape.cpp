#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "niuq/ad/tape.hpp"
#include "niuq/errors.hpp"

using namespace niuq;
using ad::Tape;
using ad::Var;

namespace {

// f(a, b) exercising every op; returns the objective node.
Var build(Tape& t, Var a, Var b) {
    Var s = a + b;
    Var d = a - b;
    Var m = a * b;
    Var q = m / (s + 3.0);
    Var e = exp(d * 0.1);
    Var l = log(a * a + 1.5);
    Var h = tanh(m);
    Var r = relu(s - 0.25);
    Var f = t.fma(a, b, q);         // a*b + q
    Var fc = t.fma_c(h, 2.5, e);    // 2.5*h + e
    Var n = -l;
    return s + d + q + e + n + h + r + f + fc + (m * 0.7) + (q + 1.25);
}

double eval(double av, double bv, double* ga = nullptr, double* gb = nullptr) {
    Tape t;
    Var a = t.leaf(av), b = t.leaf(bv);
    Var y = build(t, a, b);
    if (ga) {
        t.reverse(y);
        *ga = t.adjoint(a);
        *gb = t.adjoint(b);
    }
    return t.value(y);
}

}  // namespace

TEST_CASE("primitive op values") {
    Tape t;
    Var a = t.leaf(2.0), b = t.leaf(-3.0);
    CHECK((a + b).val() == doctest::Approx(-1.0));
    CHECK((a - b).val() == doctest::Approx(5.0));
    CHECK((a * b).val() == doctest::Approx(-6.0));
    CHECK((a / b).val() == doctest::Approx(-2.0 / 3.0));
    CHECK((-a).val() == doctest::Approx(-2.0));
    CHECK(tanh(a).val() == doctest::Approx(std::tanh(2.0)));
    CHECK(relu(b).val() == doctest::Approx(0.0));
    CHECK(relu(a).val() == doctest::Approx(2.0));
    CHECK(exp(b).val() == doctest::Approx(std::exp(-3.0)));
    CHECK(log(a).val() == doctest::Approx(std::log(2.0)));
    CHECK((a + 1.5).val() == doctest::Approx(3.5));
    CHECK((2.0 - a).val() == doctest::Approx(0.0));
    CHECK((a * 4.0).val() == doctest::Approx(8.0));
    CHECK((a / 4.0).val() == doctest::Approx(0.5));
    CHECK(square(b).val() == doctest::Approx(9.0));
    CHECK(t.fma(a, b, a).val() == doctest::Approx(-4.0));
    CHECK(t.fma_c(a, -1.5, b).val() == doctest::Approx(-6.0));
}

TEST_CASE("reverse sweep matches central finite differences") {
    const double pts[][2] = {{0.7, -0.4}, {1.3, 2.2}, {-0.6, 0.9}, {2.0, -1.1}};
    for (auto& p : pts) {
        double ga, gb;
        eval(p[0], p[1], &ga, &gb);
        const double h = 1e-6;
        const double fda = (eval(p[0] + h, p[1]) - eval(p[0] - h, p[1])) / (2 * h);
        const double fdb = (eval(p[0], p[1] + h) - eval(p[0], p[1] - h)) / (2 * h);
        CHECK(ga == doctest::Approx(fda).epsilon(1e-5));
        CHECK(gb == doctest::Approx(fdb).epsilon(1e-5));
    }
}

TEST_CASE("fma matches separate mul and add exactly") {
    Tape t;
    Var x = t.leaf(1.7), y = t.leaf(-0.3), z = t.leaf(0.9);
    Var fused = t.fma(x, y, z);
    Var split = x * y + z;
    CHECK(fused.val() == split.val());
    Var obj = square(fused) + split;
    t.reverse(obj);
    const double gx = t.adjoint(x), gy = t.adjoint(y), gz = t.adjoint(z);
    // d/dx [ (xy+z)^2 + (xy+z) ] = (2(xy+z)+1) y, etc.
    const double s = 1.7 * -0.3 + 0.9;
    CHECK(gx == doctest::Approx((2 * s + 1) * -0.3));
    CHECK(gy == doctest::Approx((2 * s + 1) * 1.7));
    CHECK(gz == doctest::Approx(2 * s + 1));
}

TEST_CASE("fan-out accumulates adjoints") {
    Tape t;
    Var x = t.leaf(0.5);
    Var y = x * x * x;  // x used three times through two muls
    t.reverse(y);
    CHECK(t.adjoint(x) == doctest::Approx(3 * 0.5 * 0.5));
}

TEST_CASE("constants carry zero adjoint and zero() is shared") {
    Tape t;
    Var z1 = t.zero();
    Var z2 = t.zero();
    CHECK(z1.idx == z2.idx);
    Var x = t.leaf(2.0);
    Var c = t.constant(3.0);
    Var y = x * c;
    t.reverse(y);
    CHECK(t.adjoint(x) == doctest::Approx(3.0));
    CHECK(t.adjoint(c) == doctest::Approx(2.0));  // well-defined, just unused
}

TEST_CASE("relu gradient is zero on the negative side") {
    Tape t;
    Var x = t.leaf(-0.5);
    Var y = relu(x);
    t.reverse(y);
    CHECK(t.adjoint(x) == 0.0);
}

TEST_CASE("clear keeps the tape reusable") {
    Tape t(8);
    for (int rep = 0; rep < 3; ++rep) {
        Var x = t.leaf(1.0 + rep);
        Var y = square(x) + 2.0;
        t.reverse(y);
        CHECK(t.value(y) == doctest::Approx((1.0 + rep) * (1.0 + rep) + 2.0));
        CHECK(t.adjoint(x) == doctest::Approx(2.0 * (1.0 + rep)));
        t.clear();
        CHECK(t.size() == 0);
    }
}

TEST_CASE("cross-tape operands are rejected") {
    Tape t1, t2;
    Var a = t1.leaf(1.0);
    Var b = t2.leaf(2.0);
    CHECK_THROWS_AS(t1.add(a, b), TapeError);
    CHECK_THROWS_AS(t1.fma(a, a, b), TapeError);
    CHECK_THROWS_AS(t2.reverse(a), TapeError);
}

TEST_CASE("adjoint outside last sweep is rejected") {
    Tape t;
    Var a = t.leaf(1.0);
    CHECK_THROWS_AS(t.adjoint(a), TapeError);  // no reverse yet
}
