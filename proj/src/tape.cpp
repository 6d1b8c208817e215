// Copyright 2026 The InvRat Authors.
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

#include "invrat/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "invrat/error.hpp"

namespace invrat {

// --------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::add(std::string name, Shape shape) {
  if (find(name) != nullptr) {
    throw InvalidArgument("duplicate parameter '" + name + "'");
  }
  Parameter p;
  p.name = std::move(name);
  p.value = Array(shape);
  p.grad = Array(shape);
  params_.push_back(std::move(p));
  return params_.back();
}

const Parameter* ParameterStore::find(std::string_view name) const {
  for (const Parameter& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Parameter& ParameterStore::get(std::string_view name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("no parameter named '" + std::string(name) + "'");
}

const Parameter& ParameterStore::get(std::string_view name) const {
  const Parameter* p = find(name);
  if (p == nullptr) {
    throw InvalidArgument("no parameter named '" + std::string(name) + "'");
  }
  return *p;
}

std::vector<Parameter*> ParameterStore::with_prefix(std::string_view prefix) {
  std::vector<Parameter*> out;
  for (Parameter& p : params_) {
    if (std::string_view(p.name).starts_with(prefix)) out.push_back(&p);
  }
  return out;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) p.grad.fill(0.0);
}

std::uint64_t ParameterStore::checksum(std::string_view prefix) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const Parameter& p : params_) {
    if (!std::string_view(p.name).starts_with(prefix)) continue;
    for (double v : p.value.data()) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &v, sizeof(double));
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
      }
    }
  }
  return h;
}

// --------------------------------------------------------------------------
// Var / Tape

const Array& Var::value() const { return tape_->value(index_); }

const Array& Var::grad() const { return tape_->grad(index_); }

Var Tape::constant(Array value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  Node n;
  n.op = "parameter";
  n.value = param.value;
  n.param = &param;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Array value, std::vector<Var> inputs,
                 Backward backward) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape_ != this) {
      throw InvalidArgument(std::string(op) + ": input from a different tape");
    }
    n.parents.push_back(v.index_);
    n.requires_grad = n.requires_grad || nodes_[v.index_].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Array& Tape::grad(std::size_t i) {
  Node& n = nodes_[i];
  if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) {
    n.grad = Array(n.value.shape());
  }
  n.touched = true;
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw InvalidArgument("backward: foreign variable");
  if (nodes_[loss.index_].value.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got shape " +
                     ShapeString(nodes_[loss.index_].value.shape()));
  }
  for (Node& n : nodes_) {
    if (n.touched) n.grad.fill(0.0);
    n.touched = false;
  }
  grad(loss.index_).fill(1.0);
  for (std::size_t i = loss.index_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.touched || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      auto src = n.grad.data();
      auto dst = n.param->grad.data();
      for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
    }
  }
}

// --------------------------------------------------------------------------
// Ops

namespace {

[[noreturn]] void Mismatch(std::string_view op, const Shape& a,
                           const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   ShapeString(a) + " and " + ShapeString(b));
}

template <typename F, typename G>
Var Elementwise(std::string_view op, Var x, F f, G df) {
  Tape& t = *x.tape();
  const Array& xv = x.value();
  Array out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  const std::size_t xi = x.index();
  return t.record(op, std::move(out), {x},
                  [xi, df](Tape& tape, std::size_t self) {
                    if (!tape.requires_grad(xi)) return;
                    const Array& g = tape.grad(self);
                    const Array& y = tape.value(self);
                    const Array& xv = tape.value(xi);
                    Array& gx = tape.grad(xi);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                      gx[i] += g[i] * df(xv[i], y[i]);
                    }
                  });
}

void AccumulateIfNeeded(Tape& tape, std::size_t target, const Array& delta,
                        double factor = 1.0) {
  if (!tape.requires_grad(target)) return;
  Array& g = tape.grad(target);
  for (std::size_t i = 0; i < delta.size(); ++i) g[i] += factor * delta[i];
}

}  // namespace

Var Embed(Var table, const std::vector<int>& ids, const Shape& ids_shape) {
  const Array& tv = table.value();
  if (tv.rank() != 2) {
    throw ShapeError("embed: table must be rank 2, got " +
                     ShapeString(tv.shape()));
  }
  if (ids.size() != ShapeSize(ids_shape)) {
    throw ShapeError("embed: " + std::to_string(ids.size()) +
                     " ids do not fill shape " + ShapeString(ids_shape));
  }
  const std::size_t vocab = tv.dim(0);
  const std::size_t d = tv.dim(1);
  Shape out_shape = ids_shape;
  out_shape.push_back(d);
  Array out(out_shape);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw InvalidArgument("embed: token id " + std::to_string(ids[i]) +
                            " outside vocabulary of " + std::to_string(vocab));
    }
    std::copy_n(tv.data().begin() + ids[i] * d, d, out.data().begin() + i * d);
  }
  const std::size_t ti = table.index();
  return table.tape()->record(
      "embed", std::move(out), {table},
      [ti, ids, d](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        Array& gt = tape.grad(ti);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          for (std::size_t k = 0; k < d; ++k) {
            gt[ids[i] * d + k] += g[i * d + k];
          }
        }
      });
}

Var Affine(Var w, Var b, Var x) {
  const Array& wv = w.value();
  const Array& bv = b.value();
  const Array& xv = x.value();
  if (wv.rank() != 2) {
    throw ShapeError("affine: weight must be rank 2, got " +
                     ShapeString(wv.shape()));
  }
  const std::size_t out_dim = wv.dim(0);
  const std::size_t in_dim = wv.dim(1);
  if (bv.rank() != 1 || bv.dim(0) != out_dim) Mismatch("affine", wv.shape(), bv.shape());
  if (xv.rank() == 0 || xv.inner() != in_dim) Mismatch("affine", wv.shape(), xv.shape());
  const std::size_t rows = xv.outer();
  Shape out_shape = xv.shape();
  out_shape.back() = out_dim;
  Array out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data().data() + r * in_dim;
    double* yr = out.data().data() + r * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wr = wv.data().data() + o * in_dim;
      double acc = bv[o];
      for (std::size_t k = 0; k < in_dim; ++k) acc += wr[k] * xr[k];
      yr[o] = acc;
    }
  }
  const std::size_t wi = w.index(), bi = b.index(), xi = x.index();
  return w.tape()->record(
      "affine", std::move(out), {w, b, x},
      [wi, bi, xi, rows, in_dim, out_dim](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        const Array& wv = tape.value(wi);
        const Array& xv = tape.value(xi);
        if (tape.requires_grad(wi)) {
          Array& gw = tape.grad(wi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double go = g[r * out_dim + o];
              if (go == 0.0) continue;
              for (std::size_t k = 0; k < in_dim; ++k) {
                gw[o * in_dim + k] += go * xv[r * in_dim + k];
              }
            }
          }
        }
        if (tape.requires_grad(bi)) {
          Array& gb = tape.grad(bi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[r * out_dim + o];
          }
        }
        if (tape.requires_grad(xi)) {
          Array& gx = tape.grad(xi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < out_dim; ++o) {
              const double go = g[r * out_dim + o];
              if (go == 0.0) continue;
              for (std::size_t k = 0; k < in_dim; ++k) {
                gx[r * in_dim + k] += go * wv[o * in_dim + k];
              }
            }
          }
        }
      });
}

Var Tanh(Var x) {
  return Elementwise(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Relu(Var x) {
  return Elementwise(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var Sigmoid(Var x) {
  return Elementwise(
      "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var Abs(Var x) {
  return Elementwise(
      "abs", x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var Softmax(Var x) {
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("softmax: rank-0 input");
  const std::size_t n = xv.inner();
  const std::size_t rows = xv.outer();
  Array out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + r * n;
    double* y = out.data().data() + r * n;
    const double mx = *std::max_element(in, in + n);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      y[k] = std::exp(in[k] - mx);
      z += y[k];
    }
    for (std::size_t k = 0; k < n; ++k) y[k] /= z;
  }
  const std::size_t xi = x.index();
  return x.tape()->record(
      "softmax", std::move(out), {x}, [xi, rows, n](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        const Array& y = tape.value(self);
        Array& gx = tape.grad(xi);
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t k = 0; k < n; ++k) dot += g[r * n + k] * y[r * n + k];
          for (std::size_t k = 0; k < n; ++k) {
            gx[r * n + k] += y[r * n + k] * (g[r * n + k] - dot);
          }
        }
      });
}

Var MeanPoolMasked(Var x, Var mask) {
  const Array& xv = x.value();
  const Array& mv = mask.value();
  if (xv.rank() != 3 || mv.rank() != 2 || xv.dim(0) != mv.dim(0) ||
      xv.dim(1) != mv.dim(1)) {
    Mismatch("mean_pool_masked", xv.shape(), mv.shape());
  }
  const std::size_t batch = xv.dim(0), len = xv.dim(1), d = xv.dim(2);
  Array out({batch, d});
  std::vector<double> denom(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    double s = 0.0;
    for (std::size_t n = 0; n < len; ++n) s += mv[b * len + n];
    denom[b] = s > 1.0 ? s : 1.0;
    for (std::size_t n = 0; n < len; ++n) {
      const double m = mv[b * len + n];
      if (m == 0.0) continue;
      for (std::size_t k = 0; k < d; ++k) {
        out[b * d + k] += m * xv[(b * len + n) * d + k];
      }
    }
    for (std::size_t k = 0; k < d; ++k) out[b * d + k] /= denom[b];
  }
  const std::size_t xi = x.index(), mi = mask.index();
  return x.tape()->record(
      "mean_pool_masked", std::move(out), {x, mask},
      [xi, mi, batch, len, d, denom](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        const Array& y = tape.value(self);
        const Array& xv = tape.value(xi);
        const Array& mv = tape.value(mi);
        if (tape.requires_grad(xi)) {
          Array& gx = tape.grad(xi);
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t n = 0; n < len; ++n) {
              const double m = mv[b * len + n] / denom[b];
              if (m == 0.0) continue;
              for (std::size_t k = 0; k < d; ++k) {
                gx[(b * len + n) * d + k] += g[b * d + k] * m;
              }
            }
          }
        }
        if (tape.requires_grad(mi)) {
          Array& gm = tape.grad(mi);
          for (std::size_t b = 0; b < batch; ++b) {
            // y = sum(m x) / D with D = sum(m) when sum(m) > 1, else D = 1.
            const bool through_denominator = denom[b] > 1.0;
            for (std::size_t n = 0; n < len; ++n) {
              double acc = 0.0;
              for (std::size_t k = 0; k < d; ++k) {
                double dy = xv[(b * len + n) * d + k];
                if (through_denominator) dy -= y[b * d + k];
                acc += g[b * d + k] * dy;
              }
              gm[b * len + n] += acc / denom[b];
            }
          }
        }
      });
}

Var Mul(Var a, Var b) {
  if (a.shape() != b.shape()) Mismatch("elementwise_mul", a.shape(), b.shape());
  const Array& av = a.value();
  const Array& bv = b.value();
  Array out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape()->record(
      "elementwise_mul", std::move(out), {a, b}, [ai, bi](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        if (tape.requires_grad(ai)) {
          Array& ga = tape.grad(ai);
          const Array& bv = tape.value(bi);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (tape.requires_grad(bi)) {
          Array& gb = tape.grad(bi);
          const Array& av = tape.value(ai);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
      });
}

namespace {

Var AddSub(std::string_view op, Var a, Var b, double sign) {
  if (a.shape() != b.shape()) Mismatch(op, a.shape(), b.shape());
  const Array& av = a.value();
  const Array& bv = b.value();
  Array out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + sign * bv[i];
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape()->record(op, std::move(out), {a, b},
                          [ai, bi, sign](Tape& tape, std::size_t self) {
                            const Array& g = tape.grad(self);
                            AccumulateIfNeeded(tape, ai, g);
                            AccumulateIfNeeded(tape, bi, g, sign);
                          });
}

}  // namespace

Var Add(Var a, Var b) { return AddSub("add", a, b, 1.0); }

Var Sub(Var a, Var b) { return AddSub("sub", a, b, -1.0); }

Var Scale(Var a, double factor) {
  return Elementwise(
      "scale", a, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Var AddScalar(Var a, double c) {
  return Elementwise(
      "add_scalar", a, [c](double v) { return v + c; },
      [](double, double) { return 1.0; });
}

Var Concat(Var a, Var b) {
  const Array& av = a.value();
  const Array& bv = b.value();
  if (av.rank() == 0 || av.rank() != bv.rank() || av.outer() != bv.outer() ||
      !std::equal(av.shape().begin(), av.shape().end() - 1,
                  bv.shape().begin())) {
    Mismatch("concat", av.shape(), bv.shape());
  }
  const std::size_t rows = av.outer(), na = av.inner(), nb = bv.inner();
  Shape out_shape = av.shape();
  out_shape.back() = na + nb;
  Array out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.data().begin() + r * na, na, out.data().begin() + r * (na + nb));
    std::copy_n(bv.data().begin() + r * nb, nb,
                out.data().begin() + r * (na + nb) + na);
  }
  const std::size_t ai = a.index(), bi = b.index();
  return a.tape()->record(
      "concat", std::move(out), {a, b},
      [ai, bi, rows, na, nb](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        if (tape.requires_grad(ai)) {
          Array& ga = tape.grad(ai);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = 0; k < na; ++k) ga[r * na + k] += g[r * (na + nb) + k];
          }
        }
        if (tape.requires_grad(bi)) {
          Array& gb = tape.grad(bi);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t k = 0; k < nb; ++k) {
              gb[r * nb + k] += g[r * (na + nb) + na + k];
            }
          }
        }
      });
}

Var CausalConvAllOnes(Var x, std::size_t l) {
  if (l == 0) throw InvalidArgument("causal_conv_allones: window length must be >= 1");
  const Array& xv = x.value();
  if (xv.rank() == 0) throw ShapeError("causal_conv_allones: rank-0 input");
  const std::size_t n = xv.inner(), rows = xv.outer();
  Array out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double running = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      running += xv[r * n + k];
      if (k >= l) running -= xv[r * n + k - l];
      out[r * n + k] = running;
    }
  }
  const std::size_t xi = x.index();
  return x.tape()->record(
      "causal_conv_allones", std::move(out), {x},
      [xi, rows, n, l](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        Array& gx = tape.grad(xi);
        // Transpose: gx[k] = sum of g[k .. min(k + l - 1, n - 1)].
        for (std::size_t r = 0; r < rows; ++r) {
          double running = 0.0;
          for (std::size_t k = n; k-- > 0;) {
            running += g[r * n + k];
            if (k + l < n) running -= g[r * n + k + l];
            gx[r * n + k] += running;
          }
        }
      });
}

Var SoftmaxCrossEntropy(Var logits, const std::vector<int>& labels) {
  const Array& lv = logits.value();
  if (lv.rank() != 2 || lv.dim(0) != labels.size()) {
    Mismatch("softmax_cross_entropy", lv.shape(),
             Shape{labels.size()});
  }
  const std::size_t rows = lv.dim(0), classes = lv.dim(1);
  Array probs(lv.shape());
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      throw InvalidArgument("softmax_cross_entropy: label " +
                            std::to_string(labels[r]) + " out of range");
    }
    const double* in = lv.data().data() + r * classes;
    const double mx = *std::max_element(in, in + classes);
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) z += std::exp(in[k] - mx);
    const double log_z = mx + std::log(z);
    for (std::size_t k = 0; k < classes; ++k) {
      probs[r * classes + k] = std::exp(in[k] - log_z);
    }
    total += log_z - in[labels[r]];
  }
  const double mean = rows ? total / static_cast<double>(rows) : 0.0;
  const std::size_t li = logits.index();
  return logits.tape()->record(
      "softmax_cross_entropy", Array::Scalar(mean), {logits},
      [li, rows, classes, labels, probs = std::move(probs)](Tape& tape,
                                                            std::size_t self) {
        const double g = tape.grad(self)[0] / static_cast<double>(rows);
        Array& gl = tape.grad(li);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t k = 0; k < classes; ++k) {
            const double onehot =
                static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0;
            gl[r * classes + k] += g * (probs[r * classes + k] - onehot);
          }
        }
      });
}

Var StraightThrough(const Array& hard, Var soft) {
  if (hard.shape() != soft.shape()) {
    Mismatch("straight_through", hard.shape(), soft.shape());
  }
  const std::size_t si = soft.index();
  return soft.tape()->record("straight_through", hard, {soft},
                             [si](Tape& tape, std::size_t self) {
                               AccumulateIfNeeded(tape, si, tape.grad(self));
                             });
}

Var Shift(Var x, long offset) {
  const Array& xv = x.value();
  if (xv.rank() != 3) {
    throw ShapeError("shift: expected rank 3, got " + ShapeString(xv.shape()));
  }
  const std::size_t batch = xv.dim(0), len = xv.dim(1), d = xv.dim(2);
  Array out(xv.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t n = 0; n < len; ++n) {
      const long src = static_cast<long>(n) + offset;
      if (src < 0 || src >= static_cast<long>(len)) continue;
      std::copy_n(xv.data().begin() + (b * len + src) * d, d,
                  out.data().begin() + (b * len + n) * d);
    }
  }
  const std::size_t xi = x.index();
  return x.tape()->record(
      "shift", std::move(out), {x},
      [xi, batch, len, d, offset](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        Array& gx = tape.grad(xi);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t n = 0; n < len; ++n) {
            const long src = static_cast<long>(n) + offset;
            if (src < 0 || src >= static_cast<long>(len)) continue;
            for (std::size_t k = 0; k < d; ++k) {
              gx[(b * len + src) * d + k] += g[(b * len + n) * d + k];
            }
          }
        }
      });
}

Var Reshape(Var x, Shape shape) {
  if (ShapeSize(shape) != x.value().size()) {
    Mismatch("reshape", x.shape(), shape);
  }
  Array out(std::move(shape), x.value().raw());
  const std::size_t xi = x.index();
  return x.tape()->record("reshape", std::move(out), {x},
                          [xi](Tape& tape, std::size_t self) {
                            AccumulateIfNeeded(tape, xi, tape.grad(self));
                          });
}

Var Sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t xi = x.index();
  return x.tape()->record("sum", Array::Scalar(s), {x},
                          [xi](Tape& tape, std::size_t self) {
                            const double g = tape.grad(self)[0];
                            Array& gx = tape.grad(xi);
                            for (double& v : gx.data()) v += g;
                          });
}

Var Mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean: empty input");
  return Scale(Sum(x), 1.0 / static_cast<double>(n));
}

Var AdjacentDiff(Var x) {
  const Array& xv = x.value();
  if (xv.rank() == 0 || xv.inner() < 2) {
    throw ShapeError("adjacent_diff: last axis must have length >= 2, got " +
                     ShapeString(xv.shape()));
  }
  const std::size_t n = xv.inner(), rows = xv.outer();
  Shape out_shape = xv.shape();
  out_shape.back() = n - 1;
  Array out(out_shape);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      out[r * (n - 1) + k] = xv[r * n + k + 1] - xv[r * n + k];
    }
  }
  const std::size_t xi = x.index();
  return x.tape()->record(
      "adjacent_diff", std::move(out), {x}, [xi, rows, n](Tape& tape, std::size_t self) {
        const Array& g = tape.grad(self);
        Array& gx = tape.grad(xi);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t k = 0; k + 1 < n; ++k) {
            const double gk = g[r * (n - 1) + k];
            gx[r * n + k + 1] += gk;
            gx[r * n + k] -= gk;
          }
        }
      });
}

}  // namespace invrat
