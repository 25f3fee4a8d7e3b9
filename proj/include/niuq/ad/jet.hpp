#pragma once

#include <cmath>

#include "niuq/ad/tape.hpp"
#include "niuq/errors.hpp"

namespace niuq::ad {

// Value and first three derivatives with respect to one designated scalar
// input. Every component is itself a tape node, so a reverse sweep yields
// gradients of any jet component with respect to parameters and the input.
struct Jet3 {
    Var v, d1, d2, d3;

    Tape& tape() const { return *v.tape; }
};

// Constant with respect to the designated input (e.g. a network parameter).
inline Jet3 jet_const(Var w) {
    Var z = w.tape->zero();
    return {w, z, z, z};
}

inline Jet3 jet_const(Tape& tape, double c) { return jet_const(tape.constant(c)); }

// Seeds the designated input: value x, unit first derivative.
inline Jet3 jet_seed(Var x) {
    Var z = x.tape->zero();
    return {x, x.tape->constant(1.0), z, z};
}

inline Jet3 jet_lift_input(Tape& tape, double x) {
    if (!std::isfinite(x)) throw InvalidInput("jet_lift_input: non-finite input");
    return jet_seed(tape.leaf(x));
}

inline Jet3 jet_add(const Jet3& a, const Jet3& b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
}

inline Jet3 jet_sub(const Jet3& a, const Jet3& b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2, a.d3 - b.d3};
}

inline Jet3 jet_neg(const Jet3& a) { return {-a.v, -a.d1, -a.d2, -a.d3}; }

inline Jet3 jet_scale(const Jet3& a, double c) {
    return {a.v * c, a.d1 * c, a.d2 * c, a.d3 * c};
}

// Scale by an input-independent tape scalar (e.g. a weight).
inline Jet3 jet_scale(Var w, const Jet3& a) {
    return {w * a.v, w * a.d1, w * a.d2, w * a.d3};
}

// Fused w * a + acc componentwise (w input-independent), one node per
// component instead of a mul/add pair.
inline Jet3 jet_fma(Var w, const Jet3& a, const Jet3& acc) {
    Tape& t = a.tape();
    return {t.fma(w, a.v, acc.v), t.fma(w, a.d1, acc.d1), t.fma(w, a.d2, acc.d2),
            t.fma(w, a.d3, acc.d3)};
}

// Shift by an input-independent tape scalar (e.g. a bias).
inline Jet3 jet_shift(const Jet3& a, Var b) { return {a.v + b, a.d1, a.d2, a.d3}; }

inline Jet3 jet_shift(const Jet3& a, double c) { return {a.v + c, a.d1, a.d2, a.d3}; }

// affine: c1 * a + c0 with plain constants.
inline Jet3 jet_affine(const Jet3& a, double c1, double c0) {
    return jet_shift(jet_scale(a, c1), c0);
}

// Leibniz rule through third order.
inline Jet3 jet_mul(const Jet3& a, const Jet3& b) {
    Var v = a.v * b.v;
    Var d1 = a.d1 * b.v + a.v * b.d1;
    Var d2 = a.d2 * b.v + 2.0 * (a.d1 * b.d1) + a.v * b.d2;
    Var d3 = a.d3 * b.v + 3.0 * (a.d2 * b.d1) + 3.0 * (a.d1 * b.d2) + a.v * b.d3;
    return {v, d1, d2, d3};
}

// Unary composition by Faa di Bruno given f(u), f'(u), f''(u), f'''(u).
inline Jet3 jet_compose(const Jet3& u, Var f0, Var f1, Var f2, Var f3) {
    Var y1 = f1 * u.d1;
    Var u1sq = square(u.d1);
    Var y2 = f2 * u1sq + f1 * u.d2;
    Var y3 = f3 * (u1sq * u.d1) + 3.0 * (f2 * (u.d1 * u.d2)) + f1 * u.d3;
    return {f0, y1, y2, y3};
}

// tanh and its derivatives: f' = 1-t^2, f'' = -2 t f', f''' = -2 f'^2 - 2 t f''.
inline Jet3 jet_tanh(const Jet3& u) {
    Var t = tanh(u.v);
    Var f1 = 1.0 - square(t);
    Var f2 = -2.0 * (t * f1);
    Var f3 = -2.0 * square(f1) - 2.0 * (t * f2);
    return jet_compose(u, t, f1, f2, f3);
}

// ReLU has no classical higher derivatives; the jet is the identity on the
// positive side, zero on the negative side, and d1 = 0 by the subgradient
// convention exactly at 0. Propagating a nonzero derivative through the kink
// is rejected.
inline Jet3 jet_relu(const Jet3& u) {
    const double v = u.v.val();
    if (std::abs(v) < 1e-12) {
        const bool moving = std::abs(u.d1.val()) > 1e-12 || std::abs(u.d2.val()) > 1e-12 ||
                            std::abs(u.d3.val()) > 1e-12;
        if (moving) throw InvalidInput("jet_relu: nonzero derivative at the ReLU kink");
    }
    Tape& tape = u.tape();
    if (v > 0.0) return {tape.relu(u.v), u.d1, u.d2, u.d3};
    Var z = tape.zero();
    return {tape.relu(u.v), z, z, z};
}

// u^3 via Leibniz (used by the cubic Poisson reaction term).
inline Jet3 jet_cube(const Jet3& u) { return jet_mul(jet_mul(u, u), u); }

}  // namespace niuq::ad
