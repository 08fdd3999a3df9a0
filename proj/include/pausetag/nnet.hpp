#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pausetag/rng.hpp"

// Minimal reverse-mode differentiation core: a tape of vector-valued nodes
// built dynamically per sentence, with exactly the building blocks the tagger
// needs. Templated on the scalar type; tests and training run in double.
namespace pausetag::nn {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Persistent tensor with a gradient accumulator.
template <class Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Matrix<Scalar>::Zero(rows, cols)),
        grad(Matrix<Scalar>::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

template <class Scalar>
void glorot_init(Parameter<Scalar>& p, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      p.value(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
    }
  }
}

template <class Scalar>
void embedding_init(Parameter<Scalar>& p, Rng& rng) {
  for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      p.value(i, j) = static_cast<Scalar>(rng.uniform(-0.1, 0.1));
    }
  }
}

// Computation tape. Nodes hold vectors; backward() walks the tape in reverse
// creation order, which is a valid topological order by construction.
template <class Scalar>
class Tape {
 public:
  struct Var {
    std::int32_t idx = -1;
    bool valid() const { return idx >= 0; }
  };

  Var input(Vector<Scalar> v) { return push(std::move(v), nullptr); }

  // Embedding lookup: one row of a parameter table, as a column vector.
  Var row(Parameter<Scalar>& table, Eigen::Index r) {
    Vector<Scalar> v = table.value.row(r).transpose();
    return push(std::move(v),
                [&table, r](Tape&, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  table.grad.row(r) += g.transpose();
                });
  }

  // W*x + b
  Var affine(Parameter<Scalar>& w, Var x, Parameter<Scalar>& b) {
    check_shape(w, x, "affine");
    Vector<Scalar> v = w.value * val(x) + b.value.col(0);
    return push(std::move(v),
                [&w, &b, x](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  w.grad.noalias() += g * t.val(x).transpose();
                  b.grad.col(0) += g;
                  t.node_grad(x).noalias() += w.value.transpose() * g;
                });
  }

  // W*x + U*h + b (one LSTM gate pre-activation)
  Var affine(Parameter<Scalar>& w, Var x, Parameter<Scalar>& u, Var h,
             Parameter<Scalar>& b) {
    check_shape(w, x, "affine");
    check_shape(u, h, "affine");
    Vector<Scalar> v = w.value * val(x) + u.value * val(h) + b.value.col(0);
    return push(std::move(v),
                [&w, &u, &b, x, h](Tape& t, const Vector<Scalar>&,
                                   const Vector<Scalar>& g) {
                  w.grad.noalias() += g * t.val(x).transpose();
                  u.grad.noalias() += g * t.val(h).transpose();
                  b.grad.col(0) += g;
                  t.node_grad(x).noalias() += w.value.transpose() * g;
                  t.node_grad(h).noalias() += u.value.transpose() * g;
                });
  }

  Var sigmoid(Var a) {
    Vector<Scalar> v = val(a).unaryExpr(
        [](Scalar x) { return Scalar(1) / (Scalar(1) + std::exp(-x)); });
    return push(std::move(v),
                [a](Tape& t, const Vector<Scalar>& y, const Vector<Scalar>& g) {
                  t.node_grad(a).array() +=
                      g.array() * y.array() * (Scalar(1) - y.array());
                });
  }

  Var tanh(Var a) {
    Vector<Scalar> v =
        val(a).unaryExpr([](Scalar x) { return std::tanh(x); });
    return push(std::move(v),
                [a](Tape& t, const Vector<Scalar>& y, const Vector<Scalar>& g) {
                  t.node_grad(a).array() +=
                      g.array() * (Scalar(1) - y.array() * y.array());
                });
  }

  Var add(Var a, Var b) {
    Vector<Scalar> v = val(a) + val(b);
    return push(std::move(v),
                [a, b](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  t.node_grad(a) += g;
                  t.node_grad(b) += g;
                });
  }

  // Elementwise product.
  Var mul(Var a, Var b) {
    Vector<Scalar> v = val(a).cwiseProduct(val(b));
    return push(std::move(v),
                [a, b](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  t.node_grad(a) += g.cwiseProduct(t.val(b));
                  t.node_grad(b) += g.cwiseProduct(t.val(a));
                });
  }

  Var concat(Var a, Var b) {
    Vector<Scalar> v(val(a).size() + val(b).size());
    v << val(a), val(b);
    return push(std::move(v),
                [a, b](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  const Eigen::Index na = t.val(a).size();
                  t.node_grad(a) += g.head(na);
                  t.node_grad(b) += g.tail(g.size() - na);
                });
  }

  // Additive Gaussian input noise; gradient passes through unchanged.
  Var add_noise(Var a, Scalar sigma, Rng& rng) {
    if (sigma == Scalar(0)) return a;
    Vector<Scalar> v = val(a);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v(i) += sigma * static_cast<Scalar>(rng.gaussian());
    }
    return push(std::move(v),
                [a](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  t.node_grad(a) += g;
                });
  }

  // Scalar sum of all entries.
  Var sum(Var a) {
    Vector<Scalar> v(1);
    v(0) = val(a).sum();
    return push(std::move(v),
                [a](Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  t.node_grad(a).array() += g(0);
                });
  }

  // Fused softmax + cross-entropy: scalar loss -log softmax(logits)[gold].
  Var softmax_xent(Var logits, int gold) {
    const Vector<Scalar>& z = val(logits);
    if (gold < 0 || gold >= z.size()) {
      throw std::out_of_range("gold label id out of range");
    }
    Vector<Scalar> probs = (z.array() - z.maxCoeff()).exp();
    probs /= probs.sum();
    Vector<Scalar> loss(1);
    loss(0) = -std::log(probs(gold));
    return push(std::move(loss),
                [logits, gold, probs = std::move(probs)](
                    Tape& t, const Vector<Scalar>&, const Vector<Scalar>& g) {
                  Vector<Scalar> d = probs * g(0);
                  d(gold) -= g(0);
                  t.node_grad(logits) += d;
                });
  }

  // Softmax probabilities of a logit node (no loss attached).
  Vector<Scalar> softmax_value(Var logits) const {
    const Vector<Scalar>& z = val(logits);
    Vector<Scalar> probs = (z.array() - z.maxCoeff()).exp();
    probs /= probs.sum();
    return probs;
  }

  const Vector<Scalar>& val(Var v) const { return nodes_[v.idx].value; }
  const Vector<Scalar>& grad(Var v) const { return nodes_[v.idx].grad; }

  // Seeds d(loss)/d(loss) = 1 and accumulates into every reachable node and
  // parameter gradient.
  void backward(Var loss) {
    if (val(loss).size() != 1) {
      throw std::invalid_argument("backward expects a scalar loss");
    }
    nodes_[loss.idx].grad(0) = Scalar(1);
    for (std::int32_t i = loss.idx; i >= 0; --i) {
      if (nodes_[i].backprop) {
        nodes_[i].backprop(*this, nodes_[i].value, nodes_[i].grad);
      }
    }
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Vector<Scalar> value;
    Vector<Scalar> grad;
    std::function<void(Tape&, const Vector<Scalar>&, const Vector<Scalar>&)>
        backprop;
  };

  Vector<Scalar>& node_grad(Var v) { return nodes_[v.idx].grad; }

  Var push(Vector<Scalar> v,
           std::function<void(Tape&, const Vector<Scalar>&, const Vector<Scalar>&)>
               bp) {
    Node node;
    node.grad = Vector<Scalar>::Zero(v.size());
    node.value = std::move(v);
    node.backprop = std::move(bp);
    nodes_.push_back(std::move(node));
    return {static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  void check_shape(const Parameter<Scalar>& w, Var x, const char* op) const {
    if (w.value.cols() != val(x).size()) {
      throw std::invalid_argument(std::string(op) + ": " + w.name +
                                  " expects input of size " +
                                  std::to_string(w.value.cols()) + ", got " +
                                  std::to_string(val(x).size()));
    }
  }

  std::vector<Node> nodes_;
};

// Standard forget-gate LSTM, no peepholes, no coupled gates.
template <class Scalar>
struct LstmParams {
  Parameter<Scalar> w_in, u_in, b_in;
  Parameter<Scalar> w_forget, u_forget, b_forget;
  Parameter<Scalar> w_out, u_out, b_out;
  Parameter<Scalar> w_cand, u_cand, b_cand;

  LstmParams() = default;

  LstmParams(const std::string& prefix, Eigen::Index d_in, Eigen::Index d_hidden,
             Rng& rng) {
    auto make_gate = [&](const char* gate, Parameter<Scalar>& w,
                         Parameter<Scalar>& u, Parameter<Scalar>& b) {
      w = Parameter<Scalar>(prefix + ".w_" + gate, d_hidden, d_in);
      u = Parameter<Scalar>(prefix + ".u_" + gate, d_hidden, d_hidden);
      b = Parameter<Scalar>(prefix + ".b_" + gate, d_hidden, 1);
      glorot_init(w, rng);
      glorot_init(u, rng);
    };
    make_gate("in", w_in, u_in, b_in);
    make_gate("forget", w_forget, u_forget, b_forget);
    make_gate("out", w_out, u_out, b_out);
    make_gate("cand", w_cand, u_cand, b_cand);
  }

  Eigen::Index hidden_size() const { return b_in.value.rows(); }
  Eigen::Index input_size() const { return w_in.value.cols(); }

  std::vector<Parameter<Scalar>*> params() {
    return {&w_in,  &u_in,  &b_in,  &w_forget, &u_forget, &b_forget,
            &w_out, &u_out, &b_out, &w_cand,   &u_cand,   &b_cand};
  }
};

template <class Scalar>
struct LstmState {
  typename Tape<Scalar>::Var h, c;
};

template <class Scalar>
LstmState<Scalar> lstm_initial_state(Tape<Scalar>& tape, Eigen::Index d_hidden) {
  auto zero = tape.input(Vector<Scalar>::Zero(d_hidden));
  return {zero, zero};
}

template <class Scalar>
LstmState<Scalar> lstm_step(Tape<Scalar>& tape, LstmParams<Scalar>& p,
                            typename Tape<Scalar>::Var x,
                            const LstmState<Scalar>& prev) {
  auto i = tape.sigmoid(tape.affine(p.w_in, x, p.u_in, prev.h, p.b_in));
  auto f = tape.sigmoid(tape.affine(p.w_forget, x, p.u_forget, prev.h, p.b_forget));
  auto o = tape.sigmoid(tape.affine(p.w_out, x, p.u_out, prev.h, p.b_out));
  auto g = tape.tanh(tape.affine(p.w_cand, x, p.u_cand, prev.h, p.b_cand));
  auto c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
  auto h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

// Per-position hidden states over the sequence, optionally read right-to-left
// (states still returned in input order).
template <class Scalar>
std::vector<typename Tape<Scalar>::Var> run_lstm(
    Tape<Scalar>& tape, LstmParams<Scalar>& p,
    std::span<const typename Tape<Scalar>::Var> inputs, bool reverse) {
  std::vector<typename Tape<Scalar>::Var> states(inputs.size());
  LstmState<Scalar> state = lstm_initial_state(tape, p.hidden_size());
  for (std::size_t step = 0; step < inputs.size(); ++step) {
    const std::size_t t = reverse ? inputs.size() - 1 - step : step;
    state = lstm_step(tape, p, inputs[t], state);
    states[t] = state.h;
  }
  return states;
}

// Per-position [forward; backward] states, each 2*d_hidden.
template <class Scalar>
std::vector<typename Tape<Scalar>::Var> bilstm_layer(
    Tape<Scalar>& tape, LstmParams<Scalar>& fwd, LstmParams<Scalar>& bwd,
    std::span<const typename Tape<Scalar>::Var> inputs) {
  if (inputs.empty()) {
    throw std::invalid_argument("bilstm_layer: empty input sequence");
  }
  const auto f = run_lstm(tape, fwd, inputs, /*reverse=*/false);
  const auto b = run_lstm(tape, bwd, inputs, /*reverse=*/true);
  std::vector<typename Tape<Scalar>::Var> out(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    out[t] = tape.concat(f[t], b[t]);
  }
  return out;
}

// Word encoding from characters: concatenation of the final forward and final
// backward states of a bi-LSTM over the character embedding sequence.
template <class Scalar>
typename Tape<Scalar>::Var char_encode(Tape<Scalar>& tape,
                                       LstmParams<Scalar>& fwd,
                                       LstmParams<Scalar>& bwd,
                                       Parameter<Scalar>& char_embeddings,
                                       std::span<const int> char_ids) {
  if (char_ids.empty()) {
    throw std::invalid_argument("char_encode: empty word");
  }
  std::vector<typename Tape<Scalar>::Var> embs(char_ids.size());
  for (std::size_t t = 0; t < char_ids.size(); ++t) {
    embs[t] = tape.row(char_embeddings, char_ids[t]);
  }
  const auto f = run_lstm(tape, fwd, std::span<const typename Tape<Scalar>::Var>(embs), false);
  const auto b = run_lstm(tape, bwd, std::span<const typename Tape<Scalar>::Var>(embs), true);
  return tape.concat(f.back(), b.front());
}

// p <- p - lr * grad, then grads zeroed.
template <class Scalar>
void sgd_update(std::span<Parameter<Scalar>* const> params, Scalar lr) {
  for (Parameter<Scalar>* p : params) {
    p->value -= lr * p->grad;
    p->grad.setZero();
  }
}

}  // namespace pausetag::nn
