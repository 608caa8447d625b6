// Copyright 2026 The im2recipe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tape-based reverse-mode automatic differentiation over Tensors.
//
// Every op appends one node holding its forward value and a closure that
// pushes the node's gradient back into its inputs. Param leaves are cached
// per tape, so a weight used at many time steps is one node and its gradient
// is summed into Param::grad once on backward().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "im2recipe/core/error.hpp"
#include "im2recipe/core/tensor.hpp"

namespace im2recipe::ad {

class Tape;

/// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Tensor& grad() const;
  double item() const { return value()[0]; }
  std::size_t size() const { return value().size(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value) { return push(std::move(value), nullptr); }

  Var param(Param& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
    Var v = push(p.value, nullptr);
    nodes_[v.id()].param = &p;
    param_nodes_.emplace(&p, v.id());
    return v;
  }

  Var push(Tensor value, Backward backward) {
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backward), nullptr});
    return Var(this, nodes_.size() - 1);
  }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }

  /// Gradient buffer of a node, allocated as zeros on first touch.
  Tensor& grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor::zeros_like(n.value);
    return n.grad;
  }
  const Tensor& grad_if_any(std::size_t id) const { return nodes_[id].grad; }

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  /// Reverse sweep from a scalar root; accumulates into Param::grad of every leaf reached.
  void backward(Var root) {
    if (root.tape() != this) throw Error("backward: variable belongs to another tape");
    if (root.size() != 1) throw DimensionError("backward: root must be a scalar");
    grad(root.id())[0] += 1.0;
    for (std::size_t i = root.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.empty()) continue;
      if (n.backward) n.backward(*this, i);
    }
    for (auto& [param, id] : param_nodes_) {
      const Tensor& g = nodes_[id].grad;
      if (g.empty()) continue;
      auto dst = param->grad.data();
      auto src = g.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }

  /// Backward from the most recent node; a no-op on an empty tape.
  void backward() {
    if (nodes_.empty()) return;
    backward(Var(this, nodes_.size() - 1));
  }

  void clear() {
    nodes_.clear();
    param_nodes_.clear();
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Backward backward;
    Param* param;
  };

  std::vector<Node> nodes_;
  std::unordered_map<Param*, std::size_t> param_nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline const Tensor& Var::grad() const { return tape_->grad_if_any(id_); }

namespace detail {

inline void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.value().shape() != b.value().shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.value().shape()) + " vs " +
                         shape_string(b.value().shape()));
  }
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kLogitClip = 30.0;

inline double clip_logit(double x) { return std::clamp(x, -kLogitClip, kLogitClip); }

inline bool clipped(double x) { return x < -kLogitClip || x > kLogitClip; }

}  // namespace detail

// ---- elementwise ----------------------------------------------------------

inline Var add(Var a, Var b) {
  detail::require_same_shape(a, b, "add");
  Tensor out = a.value();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

inline Var sub(Var a, Var b) {
  detail::require_same_shape(a, b, "sub");
  Tensor out = a.value();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

/// Hadamard product.
inline Var mul(Var a, Var b) {
  detail::require_same_shape(a, b, "mul");
  Tensor out = a.value();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bd[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(std::move(out), [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

inline Var scale(Var a, double s) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v *= s;
  const std::size_t ia = a.id();
  return a.tape()->push(std::move(out), [ia, s](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

inline Var sigmoid(Var a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = detail::stable_sigmoid(v);
  const std::size_t ia = a.id();
  return a.tape()->push(std::move(out), [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

inline Var tanh(Var a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = std::tanh(v);
  const std::size_t ia = a.id();
  return a.tape()->push(std::move(out), [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

/// max(0, x). The subgradient at 0 is taken as 0.
inline Var relu(Var a) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = v > 0.0 ? v : 0.0;
  const std::size_t ia = a.id();
  return a.tape()->push(std::move(out), [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& x = t.value(ia);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) ga[i] += g[i];
    }
  });
}

inline Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v += s;
  const std::size_t ia = a.id();
  return a.tape()->push(std::move(out), [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

// ---- structure -------------------------------------------------------------

/// Concatenates vectors end to end.
inline Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw EmptyInputError("concat: no inputs");
  std::vector<double> data;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> lens;
  for (const Var& p : parts) {
    if (p.value().rank() != 1) throw DimensionError("concat: inputs must be vectors");
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
    ids.push_back(p.id());
    lens.push_back(p.size());
  }
  Tape* tape = parts.front().tape();
  return tape->push(Tensor::vector(std::move(data)), [ids, lens](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      auto& gk = t.grad(ids[k]);
      for (std::size_t i = 0; i < lens[k]; ++i) gk[i] += g[off + i];
      off += lens[k];
    }
  });
}

inline Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(std::span<const Var>(parts));
}

/// Row `index` of a [rows, cols] table, as a vector.
inline Var gather_row(Var table, std::size_t index) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) throw DimensionError("gather_row: table must be a matrix");
  if (index >= tv.rows()) throw DimensionError("gather_row: index out of range");
  auto r = tv.row(index);
  const std::size_t it = table.id();
  return table.tape()->push(Tensor::vector({r.begin(), r.end()}), [it, index](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    auto& gt = t.grad(it);
    auto dst = gt.row(index);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  });
}

// ---- reductions ------------------------------------------------------------

inline Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape()->push(Tensor::scalar(s), [ia](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (auto& v : t.grad(ia).storage()) v += g;
  });
}

/// Sum of scalar variables.
inline Var add_n(std::span<const Var> scalars) {
  if (scalars.empty()) throw EmptyInputError("add_n: no inputs");
  double s = 0.0;
  std::vector<std::size_t> ids;
  ids.reserve(scalars.size());
  for (const Var& v : scalars) {
    if (v.size() != 1) throw DimensionError("add_n: inputs must be scalars");
    s += v.item();
    ids.push_back(v.id());
  }
  return scalars.front().tape()->push(Tensor::scalar(s), [ids](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (std::size_t id : ids) t.grad(id)[0] += g;
  });
}

inline Var mean(std::span<const Var> scalars) {
  return scale(add_n(scalars), 1.0 / static_cast<double>(scalars.size()));
}

inline Var dot(Var a, Var b) {
  detail::require_same_shape(a, b, "dot");
  const double d = linalg::dot(a.value().data(), b.value().data());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(Tensor::scalar(d), [ia, ib](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * bv[i];
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g * av[i];
  });
}

// ---- layers ----------------------------------------------------------------

/// y = x W^T + b. x is [in] or [n, in]; W is [out, in]; b is [out].
inline Var linear(Var x, Var w, Var b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (wv.rank() != 2) throw DimensionError("linear: weight must be a matrix");
  const std::size_t out_dim = wv.rows();
  const std::size_t in_dim = wv.cols();
  if (bv.rank() != 1 || bv.size() != out_dim) {
    throw DimensionError("linear: bias shape " + shape_string(bv.shape()) + " does not match weight " +
                         shape_string(wv.shape()));
  }
  if (xv.cols() != in_dim || xv.rank() > 2) {
    throw DimensionError("linear: input shape " + shape_string(xv.shape()) + " does not match weight " +
                         shape_string(wv.shape()));
  }
  const std::size_t n = xv.rows();
  Tensor out = xv.rank() == 1 ? Tensor({out_dim}) : Tensor({n, out_dim});
  for (std::size_t r = 0; r < n; ++r) {
    auto xr = xv.row(r);
    for (std::size_t o = 0; o < out_dim; ++o) {
      out[r * out_dim + o] = linalg::dot(xr, wv.row(o)) + bv[o];
    }
  }
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape()->push(std::move(out), [ix, iw, ib, n, in_dim, out_dim](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(ix);
    const Tensor& wv = t.value(iw);
    {
      auto& gx = t.grad(ix);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[r * out_dim + o];
          if (go == 0.0) continue;
          const double* wr = wv.data().data() + o * in_dim;
          double* gxr = gx.data().data() + r * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) gxr[i] += go * wr[i];
        }
      }
    }
    {
      auto& gw = t.grad(iw);
      for (std::size_t r = 0; r < n; ++r) {
        const double* xr = xv.data().data() + r * in_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[r * out_dim + o];
          if (go == 0.0) continue;
          double* gwr = gw.data().data() + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) gwr[i] += go * xr[i];
        }
      }
    }
    {
      auto& gb = t.grad(ib);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[r * out_dim + o];
      }
    }
  });
}

/// y = W x for a vector x (no bias).
inline Var matvec(Var w, Var x) {
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  if (wv.rank() != 2 || xv.rank() != 1 || wv.cols() != xv.size()) {
    throw DimensionError("matvec: shapes " + shape_string(wv.shape()) + " and " + shape_string(xv.shape()));
  }
  const std::size_t out_dim = wv.rows();
  const std::size_t in_dim = wv.cols();
  Tensor out({out_dim});
  for (std::size_t o = 0; o < out_dim; ++o) out[o] = linalg::dot(wv.row(o), xv.data());
  const std::size_t iw = w.id(), ix = x.id();
  return w.tape()->push(std::move(out), [iw, ix, in_dim, out_dim](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& wv = t.value(iw);
    const Tensor& xv = t.value(ix);
    auto& gw = t.grad(iw);
    for (std::size_t o = 0; o < out_dim; ++o) {
      if (g[o] == 0.0) continue;
      for (std::size_t i = 0; i < in_dim; ++i) gw[o * in_dim + i] += g[o] * xv[i];
    }
    auto& gx = t.grad(ix);
    for (std::size_t o = 0; o < out_dim; ++o) {
      if (g[o] == 0.0) continue;
      for (std::size_t i = 0; i < in_dim; ++i) gx[i] += g[o] * wv[o * in_dim + i];
    }
  });
}

/// Normalized cosine similarity of two equal-length vectors.
inline Var cosine(Var a, Var b) {
  detail::require_same_shape(a, b, "cosine");
  const auto av = a.value().data();
  const auto bv = b.value().data();
  const double na = linalg::norm(av);
  const double nb = linalg::norm(bv);
  if (na == 0.0 || nb == 0.0) throw DegenerateInputError("cosine: zero-norm input");
  const double c = std::clamp(linalg::dot(av, bv) / (na * nb), -1.0, 1.0);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push(Tensor::scalar(c), [ia, ib, na, nb, c](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Tensor& av = t.value(ia);
    const Tensor& bv = t.value(ib);
    // d cos / da = b/(|a||b|) - cos * a/|a|^2
    auto& ga = t.grad(ia);
    for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * (bv[i] / (na * nb) - c * av[i] / (na * na));
    auto& gb = t.grad(ib);
    for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g * (av[i] / (na * nb) - c * bv[i] / (nb * nb));
  });
}

/// Mean negative log-softmax probability of the labelled class.
/// logits is [K] (one label) or [n, K]. Logits are clipped to +-30.
inline Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
  const Tensor& lv = logits.value();
  if (lv.rank() > 2) throw DimensionError("softmax_cross_entropy: logits must be [K] or [n,K]");
  const std::size_t n = lv.rows();
  const std::size_t k = lv.cols();
  if (labels.size() != n) throw DimensionError("softmax_cross_entropy: label count does not match rows");
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  Tensor probs(lv.shape());
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (lab[r] >= k) {
      throw LabelError("softmax_cross_entropy: label " + std::to_string(lab[r]) + " outside [0," +
                       std::to_string(k) + ")");
    }
    double mx = -detail::kLogitClip;
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, detail::clip_logit(lv.at(r, c)));
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double e = std::exp(detail::clip_logit(lv.at(r, c)) - mx);
      probs[r * k + c] = e;
      z += e;
    }
    for (std::size_t c = 0; c < k; ++c) probs[r * k + c] /= z;
    loss += -(detail::clip_logit(lv.at(r, lab[r])) - mx - std::log(z));
  }
  loss /= static_cast<double>(n);
  const std::size_t il = logits.id();
  return logits.tape()->push(
      Tensor::scalar(loss), [il, lab = std::move(lab), probs = std::move(probs), n, k](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0] / static_cast<double>(n);
        const Tensor& lv = t.value(il);
        auto& gl = t.grad(il);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < k; ++c) {
            if (detail::clipped(lv[r * k + c])) continue;
            const double target = c == lab[r] ? 1.0 : 0.0;
            gl[r * k + c] += g * (probs[r * k + c] - target);
          }
        }
      });
}

inline Var softmax_cross_entropy(Var logits, std::size_t label) {
  const std::size_t labels[] = {label};
  return softmax_cross_entropy(logits, std::span<const std::size_t>(labels));
}

/// Mean binary cross-entropy of sigmoid(logits) against {0,1} targets.
inline Var sigmoid_binary_cross_entropy(Var logits, std::span<const double> targets) {
  const Tensor& lv = logits.value();
  if (targets.size() != lv.size()) throw DimensionError("sigmoid_binary_cross_entropy: target length mismatch");
  const std::size_t n = lv.size();
  std::vector<double> tg(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = detail::clip_logit(lv[i]);
    // log(1 + exp(-|z|)) + max(z, 0) - z*t
    loss += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * tg[i];
  }
  loss /= static_cast<double>(n);
  const std::size_t il = logits.id();
  return logits.tape()->push(Tensor::scalar(loss), [il, tg = std::move(tg), n](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0] / static_cast<double>(n);
    const Tensor& lv = t.value(il);
    auto& gl = t.grad(il);
    for (std::size_t i = 0; i < n; ++i) {
      if (detail::clipped(lv[i])) continue;
      gl[i] += g * (detail::stable_sigmoid(lv[i]) - tg[i]);
    }
  });
}

}  // namespace im2recipe::ad
