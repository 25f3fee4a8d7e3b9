#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "niuq/ad/jet.hpp"
#include "niuq/errors.hpp"
#include "niuq/nn/mlp.hpp"
#include "niuq/rng.hpp"

using namespace niuq;
using ad::Jet3;
using ad::Tape;
using ad::Var;

namespace {

struct JetVals {
    double v, d1, d2, d3;
};

JetVals vals(const Jet3& j) { return {j.v.val(), j.d1.val(), j.d2.val(), j.d3.val()}; }

// Evaluates f's jet at x and returns the numeric components.
JetVals jet_of(double x, const std::function<Jet3(Tape&, Jet3)>& f) {
    Tape t;
    return vals(f(t, ad::jet_lift_input(t, x)));
}

// Checks all three derivatives against central differences of the lower one.
void check_against_fd(double x, const std::function<Jet3(Tape&, Jet3)>& f, double rtol = 1e-4) {
    const double h = 1e-5;
    JetVals c = jet_of(x, f), p = jet_of(x + h, f), m = jet_of(x - h, f);
    CHECK(c.d1 == doctest::Approx((p.v - m.v) / (2 * h)).epsilon(rtol));
    CHECK(c.d2 == doctest::Approx((p.d1 - m.d1) / (2 * h)).epsilon(rtol));
    CHECK(c.d3 == doctest::Approx((p.d2 - m.d2) / (2 * h)).epsilon(rtol));
}

}  // namespace

TEST_CASE("tanh jet has closed-form derivatives") {
    // (tanh)''' at 0 is -2; at general x: 1-t^2, -2t(1-t^2), (1-t^2)(6t^2-2).
    for (double x : {0.0, 0.4, -1.1, 2.3}) {
        JetVals j = jet_of(x, [](Tape&, Jet3 in) { return ad::jet_tanh(in); });
        const double tv = std::tanh(x), s = 1 - tv * tv;
        CHECK(j.v == doctest::Approx(tv));
        CHECK(j.d1 == doctest::Approx(s));
        CHECK(j.d2 == doctest::Approx(-2 * tv * s));
        CHECK(j.d3 == doctest::Approx(s * (6 * tv * tv - 2)));
    }
    JetVals j0 = jet_of(0.0, [](Tape&, Jet3 in) { return ad::jet_tanh(in); });
    CHECK(j0.d3 == doctest::Approx(-2.0));
}

TEST_CASE("product rule through third order") {
    // g(x) = x^2 * x^3 = x^5: derivatives 5x^4, 20x^3, 60x^2.
    const double x = 1.3;
    JetVals j = jet_of(x, [](Tape&, Jet3 in) {
        return ad::jet_mul(ad::jet_mul(in, in), ad::jet_cube(in));
    });
    CHECK(j.v == doctest::Approx(std::pow(x, 5)));
    CHECK(j.d1 == doctest::Approx(5 * std::pow(x, 4)));
    CHECK(j.d2 == doctest::Approx(20 * std::pow(x, 3)));
    CHECK(j.d3 == doctest::Approx(60 * x * x));
}

TEST_CASE("affine and fma jets") {
    const double x = 0.8;
    JetVals j = jet_of(x, [](Tape& t, Jet3 in) {
        Var w = t.leaf(2.0);
        Jet3 a = ad::jet_affine(in, 3.0, -1.0);     // 3x - 1
        Jet3 b = ad::jet_scale(w, in);              // 2x
        return ad::jet_fma(w, a, b);                // 2(3x-1) + 2x = 8x - 2
    });
    CHECK(j.v == doctest::Approx(8 * x - 2));
    CHECK(j.d1 == doctest::Approx(8.0));
    CHECK(j.d2 == doctest::Approx(0.0));
    CHECK(j.d3 == doctest::Approx(0.0));
}

TEST_CASE("composite jets agree with finite differences") {
    auto f = [](Tape& t, Jet3 in) {
        Jet3 u = ad::jet_tanh(ad::jet_affine(in, 1.7, 0.3));
        Jet3 w = ad::jet_mul(u, ad::jet_shift(in, t.leaf(0.5)));
        return ad::jet_sub(ad::jet_cube(w), ad::jet_neg(u));
    };
    for (double x : {-0.9, 0.1, 0.75}) check_against_fd(x, f);
}

TEST_CASE("mlp jet components agree with finite differences") {
    nn::MlpSpec spec;
    spec.hidden = {7, 5};
    nn::NetworkSpec ns;
    ns.mlp = spec;
    Rng rng(11);
    nn::ParamVector pv = nn::init_params(ns, rng);
    auto f = [&](Tape& t, Jet3 in) {
        std::vector<Var> leaves;
        for (double p : pv.data) leaves.push_back(t.leaf(p));
        return nn::mlp_jet_forward(spec, leaves, in);
    };
    for (double x : {0.2, -0.6, 0.95}) check_against_fd(x, f);
}

TEST_CASE("derivative of the residual matches the jet of its derivative") {
    // r(x) = kappa u'' - lambda u^3 satisfies r' = kappa u''' - 3 lambda u^2 u'.
    nn::MlpSpec spec;
    spec.hidden = {6};
    nn::NetworkSpec ns;
    ns.mlp = spec;
    Rng rng(3);
    nn::ParamVector pv = nn::init_params(ns, rng);
    const double kappa = 0.01, lambda = 0.15, h = 1e-5;
    auto r = [&](double x) {
        Tape t;
        Jet3 u = nn::mlp_jet_forward(t, spec, pv, x);
        return kappa * u.d2.val() - lambda * std::pow(u.v.val(), 3);
    };
    for (double x : {0.3, 0.62}) {
        Tape t;
        Jet3 u = nn::mlp_jet_forward(t, spec, pv, x);
        const double rp = kappa * u.d3.val() -
                          3 * lambda * u.v.val() * u.v.val() * u.d1.val();
        CHECK(rp == doctest::Approx((r(x + h) - r(x - h)) / (2 * h)).epsilon(1e-4));
    }
}

TEST_CASE("reverse sweep through a jet component gives parameter gradients") {
    nn::MlpSpec spec;
    spec.hidden = {5};
    nn::NetworkSpec ns;
    ns.mlp = spec;
    Rng rng(21);
    nn::ParamVector pv = nn::init_params(ns, rng);
    const double x = 0.45;
    Tape t;
    std::vector<Var> leaves;
    for (double p : pv.data) leaves.push_back(t.leaf(p));
    Jet3 u = nn::mlp_jet_forward(spec, leaves, ad::jet_lift_input(t, x));
    t.reverse(u.d2);  // objective: u''(x)
    auto u2_at = [&](const std::vector<double>& params) {
        Tape t2;
        std::vector<Var> l2;
        for (double p : params) l2.push_back(t2.leaf(p));
        return nn::mlp_jet_forward(spec, l2, ad::jet_lift_input(t2, x)).d2.val();
    };
    const double h = 1e-6;
    for (std::size_t k = 0; k < pv.data.size(); k += 4) {
        std::vector<double> pp = pv.data, pm = pv.data;
        pp[k] += h;
        pm[k] -= h;
        const double fd = (u2_at(pp) - u2_at(pm)) / (2 * h);
        CHECK(t.adjoint(leaves[k]) == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("relu jet rejects a moving kink and is one-sided otherwise") {
    {
        Tape t;
        Jet3 j = ad::jet_relu(ad::jet_lift_input(t, 0.7));
        CHECK(j.v.val() == doctest::Approx(0.7));
        CHECK(j.d1.val() == doctest::Approx(1.0));
    }
    {
        Tape t;
        Jet3 j = ad::jet_relu(ad::jet_lift_input(t, -0.7));
        CHECK(j.v.val() == 0.0);
        CHECK(j.d1.val() == 0.0);
    }
    {
        Tape t;
        CHECK_THROWS_AS(ad::jet_relu(ad::jet_lift_input(t, 0.0)), InvalidInput);
    }
}

TEST_CASE("non-finite jet input is rejected") {
    Tape t;
    CHECK_THROWS_AS(ad::jet_lift_input(t, std::nan("")), InvalidInput);
}
