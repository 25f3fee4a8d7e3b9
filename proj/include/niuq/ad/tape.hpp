#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "niuq/errors.hpp"

namespace niuq::ad {

enum class Op : std::uint8_t {
    Const,
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Tanh,
    Relu,
    Exp,
    Log,
    AddC,  // a + aux
    MulC,  // a * aux
    Fma,   // a * b + c
    FmaC,  // a * aux + b
};

class Tape;

// Handle to a scalar node on a tape. Cheap to copy; valid until Tape::clear().
struct Var {
    Tape* tape = nullptr;
    std::uint32_t idx = 0;

    double val() const;
};

// Arena of scalar operations. Forward values are computed eagerly at record
// time; a reverse sweep fills one adjoint per node. Single-owner: one tape
// per concurrent evaluation.
class Tape {
  public:
    explicit Tape(std::size_t reserve_nodes = 1 << 16) {
        ops_.reserve(reserve_nodes);
        a_.reserve(reserve_nodes);
        b_.reserve(reserve_nodes);
        aux_.reserve(reserve_nodes);
        val_.reserve(reserve_nodes);
    }

    std::size_t size() const { return ops_.size(); }

    // Drops all nodes but keeps allocated capacity for reuse.
    void clear() {
        ops_.clear();
        a_.clear();
        b_.clear();
        aux_.clear();
        val_.clear();
        adj_.clear();
        zero_cached_ = false;
    }

    Var constant(double c) { return push(Op::Const, 0, 0, c, c); }

    // Shared constant-zero node (heavily used as the derivative of constants).
    Var zero() {
        if (!zero_cached_) {
            zero_ = constant(0.0);
            zero_cached_ = true;
        }
        return zero_;
    }

    Var leaf(double v) { return push(Op::Leaf, 0, 0, 0.0, v); }

    Var add(Var x, Var y) { check(x, y); return push(Op::Add, x.idx, y.idx, 0.0, val_[x.idx] + val_[y.idx]); }
    Var sub(Var x, Var y) { check(x, y); return push(Op::Sub, x.idx, y.idx, 0.0, val_[x.idx] - val_[y.idx]); }
    Var mul(Var x, Var y) { check(x, y); return push(Op::Mul, x.idx, y.idx, 0.0, val_[x.idx] * val_[y.idx]); }
    Var div(Var x, Var y) { check(x, y); return push(Op::Div, x.idx, y.idx, 0.0, val_[x.idx] / val_[y.idx]); }
    Var neg(Var x) { check(x); return push(Op::Neg, x.idx, 0, 0.0, -val_[x.idx]); }
    Var tanh(Var x) { check(x); return push(Op::Tanh, x.idx, 0, 0.0, std::tanh(val_[x.idx])); }
    Var relu(Var x) { check(x); return push(Op::Relu, x.idx, 0, 0.0, val_[x.idx] > 0.0 ? val_[x.idx] : 0.0); }
    Var exp(Var x) { check(x); return push(Op::Exp, x.idx, 0, 0.0, std::exp(val_[x.idx])); }
    Var log(Var x) { check(x); return push(Op::Log, x.idx, 0, 0.0, std::log(val_[x.idx])); }
    // Fused x * y + z in a single node; the workhorse of dense layers. The
    // third operand index rides in the aux slot (exact for idx < 2^53).
    Var fma(Var x, Var y, Var z) {
        check(x, y);
        check(z);
        return push(Op::Fma, x.idx, y.idx, static_cast<double>(z.idx),
                    val_[x.idx] * val_[y.idx] + val_[z.idx]);
    }
    // Fused x * c + z with a plain-constant coefficient.
    Var fma_c(Var x, double c, Var z) {
        check(x, z);
        return push(Op::FmaC, x.idx, z.idx, c, val_[x.idx] * c + val_[z.idx]);
    }
    Var add_c(Var x, double c) { check(x); return push(Op::AddC, x.idx, 0, c, val_[x.idx] + c); }
    Var mul_c(Var x, double c) { check(x); return push(Op::MulC, x.idx, 0, c, val_[x.idx] * c); }

    double value(Var x) const { return val_[x.idx]; }

    // Reverse sweep seeding d(objective)/d(objective) = 1.
    void reverse(Var objective) {
        if (objective.tape != this || objective.idx >= ops_.size())
            throw TapeError("reverse: objective is not a node of this tape");
        adj_.assign(ops_.size(), 0.0);
        adj_[objective.idx] = 1.0;
        for (std::uint32_t i = static_cast<std::uint32_t>(ops_.size()); i-- > 0;) {
            const double w = adj_[i];
            if (w == 0.0) continue;
            const std::uint32_t a = a_[i];
            const std::uint32_t b = b_[i];
            switch (ops_[i]) {
                case Op::Const:
                case Op::Leaf:
                    break;
                case Op::Add:
                    adj_[a] += w;
                    adj_[b] += w;
                    break;
                case Op::Sub:
                    adj_[a] += w;
                    adj_[b] -= w;
                    break;
                case Op::Mul:
                    adj_[a] += w * val_[b];
                    adj_[b] += w * val_[a];
                    break;
                case Op::Div:
                    adj_[a] += w / val_[b];
                    adj_[b] -= w * val_[i] / val_[b];
                    break;
                case Op::Neg:
                    adj_[a] -= w;
                    break;
                case Op::Tanh:
                    adj_[a] += w * (1.0 - val_[i] * val_[i]);
                    break;
                case Op::Relu:
                    if (val_[a] > 0.0) adj_[a] += w;
                    break;
                case Op::Exp:
                    adj_[a] += w * val_[i];
                    break;
                case Op::Log:
                    adj_[a] += w / val_[a];
                    break;
                case Op::AddC:
                    adj_[a] += w;
                    break;
                case Op::MulC:
                    adj_[a] += w * aux_[i];
                    break;
                case Op::Fma:
                    adj_[a] += w * val_[b];
                    adj_[b] += w * val_[a];
                    adj_[static_cast<std::uint32_t>(aux_[i])] += w;
                    break;
                case Op::FmaC:
                    adj_[a] += w * aux_[i];
                    adj_[b] += w;
                    break;
            }
        }
    }

    double adjoint(Var x) const {
        if (x.tape != this || x.idx >= adj_.size())
            throw TapeError("adjoint: node not covered by last reverse sweep");
        return adj_[x.idx];
    }

  private:
    void check(Var x) const {
        if (x.tape != this) throw TapeError("operand lives on a different tape");
    }
    void check(Var x, Var y) const { check(x); check(y); }

    Var push(Op op, std::uint32_t a, std::uint32_t b, double aux, double v) {
        ops_.push_back(op);
        a_.push_back(a);
        b_.push_back(b);
        aux_.push_back(aux);
        val_.push_back(v);
        return Var{this, static_cast<std::uint32_t>(ops_.size() - 1)};
    }

    std::vector<Op> ops_;
    std::vector<std::uint32_t> a_, b_;
    std::vector<double> aux_;
    std::vector<double> val_;
    std::vector<double> adj_;
    Var zero_{};
    bool zero_cached_ = false;
};

inline double Var::val() const { return tape->value(*this); }

// Operator sugar; all operands must share a tape.
inline Var operator+(Var x, Var y) { return x.tape->add(x, y); }
inline Var operator-(Var x, Var y) { return x.tape->sub(x, y); }
inline Var operator*(Var x, Var y) { return x.tape->mul(x, y); }
inline Var operator/(Var x, Var y) { return x.tape->div(x, y); }
inline Var operator-(Var x) { return x.tape->neg(x); }
inline Var operator+(Var x, double c) { return x.tape->add_c(x, c); }
inline Var operator+(double c, Var x) { return x.tape->add_c(x, c); }
inline Var operator-(Var x, double c) { return x.tape->add_c(x, -c); }
inline Var operator-(double c, Var x) { return x.tape->add_c(x.tape->neg(x), c); }
inline Var operator*(Var x, double c) { return x.tape->mul_c(x, c); }
inline Var operator*(double c, Var x) { return x.tape->mul_c(x, c); }
inline Var operator/(Var x, double c) { return x.tape->mul_c(x, 1.0 / c); }
inline Var tanh(Var x) { return x.tape->tanh(x); }
inline Var relu(Var x) { return x.tape->relu(x); }
inline Var exp(Var x) { return x.tape->exp(x); }
inline Var log(Var x) { return x.tape->log(x); }
inline Var square(Var x) { return x.tape->mul(x, x); }

}  // namespace niuq::ad
