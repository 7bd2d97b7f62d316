// Copyright 2026 The Hydra Authors.
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

#include "hydra/numerics/tape.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include <Eigen/Core>

namespace hydra::numerics {

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << ", ";
    out << shape[i];
  }
  out << ')';
  return out.str();
}

AttentionMask AttentionMask::Causal(std::size_t n) {
  AttentionMask mask(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) mask.set_blocked(i, j, true);
  }
  return mask;
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstStrided = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using MutStrided = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;

std::string Dims(std::size_t r, std::size_t c) {
  return "(" + std::to_string(r) + ", " + std::to_string(c) + ")";
}

template <typename T>
void SoftmaxRow(const T* in, T* out, std::size_t n) {
  T max = in[0];
  for (std::size_t j = 1; j < n; ++j) max = std::max(max, in[j]);
  T total = T(0);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = std::exp(in[j] - max);
    total += out[j];
  }
  const T inv = T(1) / total;
  for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
}

template <typename T>
void LogSoftmaxRow(const T* in, T* out, std::size_t n) {
  T max = in[0];
  for (std::size_t j = 1; j < n; ++j) max = std::max(max, in[j]);
  T total = T(0);
  for (std::size_t j = 0; j < n; ++j) total += std::exp(in[j] - max);
  const T log_total = std::log(total) + max;
  for (std::size_t j = 0; j < n; ++j) out[j] = in[j] - log_total;
}

// Shared attention kernel. probs receives heads x tq x tk softmax weights.
template <typename T>
void AttentionForward(const T* q, const T* k, const T* v, std::size_t tq,
                      std::size_t tk, std::size_t d, std::size_t heads,
                      const AttentionMask& mask, T* probs, T* out) {
  const std::size_t dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  const bool masked = mask.rows() > 0;
  for (std::size_t h = 0; h < heads; ++h) {
    ConstStrided<T> qh(q + h * dh, tq, dh, Eigen::OuterStride<>(d));
    ConstStrided<T> kh(k + h * dh, tk, dh, Eigen::OuterStride<>(d));
    ConstStrided<T> vh(v + h * dh, tk, dh, Eigen::OuterStride<>(d));
    MutMap<T> p(probs + h * tq * tk, tq, tk);
    p.noalias() = (qh * kh.transpose()) * scale;
    for (std::size_t i = 0; i < tq; ++i) {
      T* row = p.data() + i * tk;
      if (masked) {
        for (std::size_t j = 0; j < tk; ++j) {
          if (mask.blocked(i, j)) row[j] += static_cast<T>(kMaskPenalty);
        }
      }
      SoftmaxRow(row, row, tk);
    }
    MutStrided<T> oh(out + h * dh, tq, dh, Eigen::OuterStride<>(d));
    oh.noalias() = p * vh;
  }
}

}  // namespace

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  Require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(),
          ErrorCode::kInvalidArgument, "variable does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  Require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(),
          ErrorCode::kInvalidArgument, "variable does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
Var Tape<T>::Leaf(std::size_t rows, std::size_t cols, std::vector<T> values) {
  Node& n = nodes_.emplace_back();
  n.rows = rows;
  n.cols = cols;
  n.storage = std::move(values);
  n.data = n.storage.data();
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::Constant(const Tensor<T>& value) {
  return Leaf(value.rows(), value.cols(), value.values());
}

template <typename T>
Var Tape<T>::Constant(std::size_t rows, std::size_t cols,
                      std::vector<T> values) {
  Require(rows * cols == values.size(), ErrorCode::kInvalidArgument,
          "constant data does not match " + Dims(rows, cols));
  return Leaf(rows, cols, std::move(values));
}

template <typename T>
Var Tape<T>::View(const Tensor<T>& value) {
  Node& n = nodes_.emplace_back();
  n.rows = value.rows();
  n.cols = value.cols();
  n.data = value.data().data();
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::Param(const Parameter<T>& parameter) {
  if (auto it = param_nodes_.find(&parameter); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Node& n = nodes_.emplace_back();
  n.rows = parameter.value.rows();
  n.cols = parameter.value.cols();
  n.data = parameter.value.data().data();
  n.parameter = &parameter;
  n.requires_grad = record_gradients_ && parameter.requires_grad;
  const int id = static_cast<int>(nodes_.size() - 1);
  if (n.requires_grad) {
    Node* self = &n;
    n.backward = [self]() {
      auto dst = self->parameter->grad.mutable_data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self->grad[i];
    };
  }
  param_nodes_.emplace(&parameter, id);
  return Var{id};
}

template <typename T>
Var Tape<T>::Op(std::size_t rows, std::size_t cols,
                std::initializer_list<Var> inputs,
                std::function<void(T*)> forward,
                std::function<void()> backward) {
  bool needs_grad = false;
  if (record_gradients_) {
    for (Var in : inputs) needs_grad = needs_grad || node(in).requires_grad;
  }
  Node& n = nodes_.emplace_back();
  n.rows = rows;
  n.cols = cols;
  n.storage.assign(rows * cols, T(0));
  n.data = n.storage.data();
  n.requires_grad = needs_grad;
  forward(n.storage.data());
  n.forward = std::move(forward);
  if (needs_grad) n.backward = std::move(backward);
  return Var{static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
T* Tape<T>::GradOf(Var v) {
  Node& n = node(v);
  return n.requires_grad ? n.grad.data() : nullptr;
}

template <typename T>
Var Tape<T>::MatMul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Require(na.cols == nb.rows, ErrorCode::kInvalidArgument,
          "matmul shape mismatch " + Dims(na.rows, na.cols) + " x " +
              Dims(nb.rows, nb.cols));
  const std::size_t r = na.rows, k = na.cols, c = nb.cols;
  const Node* pa = &na;
  const Node* pb = &nb;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {a, b},
      [pa, pb, r, k, c](T* out) {
        MutMap<T>(out, r, c).noalias() =
            ConstMap<T>(pa->data, r, k) * ConstMap<T>(pb->data, k, c);
      },
      [this, a, b, pa, pb, r, k, c, out_id]() {
        ConstMap<T> dout(nodes_[out_id].grad.data(), r, c);
        if (T* ga = GradOf(a)) {
          MutMap<T>(ga, r, k).noalias() +=
              dout * ConstMap<T>(pb->data, k, c).transpose();
        }
        if (T* gb = GradOf(b)) {
          MutMap<T>(gb, k, c).noalias() +=
              ConstMap<T>(pa->data, r, k).transpose() * dout;
        }
      });
}

template <typename T>
Var Tape<T>::Add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Require(na.rows == nb.rows && na.cols == nb.cols,
          ErrorCode::kInvalidArgument,
          "add shape mismatch " + Dims(na.rows, na.cols) + " vs " +
              Dims(nb.rows, nb.cols));
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const Node* pb = &nb;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      na.rows, na.cols, {a, b},
      [pa, pb, n](T* out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = pa->data[i] + pb->data[i];
      },
      [this, a, b, n, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        for (Var in : {a, b}) {
          if (T* g = GradOf(in)) {
            for (std::size_t i = 0; i < n; ++i) g[i] += dout[i];
          }
        }
      });
}

template <typename T>
Var Tape<T>::AddBias(Var a, Var bias) {
  const Node& na = node(a);
  const Node& nb = node(bias);
  Require(nb.rows * nb.cols == na.cols, ErrorCode::kInvalidArgument,
          "bias of " + Dims(nb.rows, nb.cols) + " does not broadcast over " +
              Dims(na.rows, na.cols));
  const std::size_t r = na.rows, c = na.cols;
  const Node* pa = &na;
  const Node* pb = &nb;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {a, bias},
      [pa, pb, r, c](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            out[i * c + j] = pa->data[i * c + j] + pb->data[j];
          }
        }
      },
      [this, a, bias, r, c, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < r * c; ++i) ga[i] += dout[i];
        }
        if (T* gb = GradOf(bias)) {
          for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) gb[j] += dout[i * c + j];
          }
        }
      });
}

template <typename T>
Var Tape<T>::Mul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  Require(na.rows == nb.rows && na.cols == nb.cols,
          ErrorCode::kInvalidArgument,
          "mul shape mismatch " + Dims(na.rows, na.cols) + " vs " +
              Dims(nb.rows, nb.cols));
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const Node* pb = &nb;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      na.rows, na.cols, {a, b},
      [pa, pb, n](T* out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = pa->data[i] * pb->data[i];
      },
      [this, a, b, pa, pb, n, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < n; ++i) ga[i] += dout[i] * pb->data[i];
        }
        if (T* gb = GradOf(b)) {
          for (std::size_t i = 0; i < n; ++i) gb[i] += dout[i] * pa->data[i];
        }
      });
}

template <typename T>
Var Tape<T>::Scale(Var a, T factor) {
  const Node& na = node(a);
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      na.rows, na.cols, {a},
      [pa, n, factor](T* out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = pa->data[i] * factor;
      },
      [this, a, n, factor, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < n; ++i) ga[i] += dout[i] * factor;
        }
      });
}

template <typename T>
Var Tape<T>::Gelu(Var a) {
  const Node& na = node(a);
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  static const T kC = static_cast<T>(std::sqrt(2.0 / 3.14159265358979323846));
  static const T kA = static_cast<T>(0.044715);
  return Op(
      na.rows, na.cols, {a},
      [pa, n](T* out) {
        for (std::size_t i = 0; i < n; ++i) {
          const T x = pa->data[i];
          out[i] = T(0.5) * x * (T(1) + std::tanh(kC * (x + kA * x * x * x)));
        }
      },
      [this, a, pa, n, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < n; ++i) {
            const T x = pa->data[i];
            const T t = std::tanh(kC * (x + kA * x * x * x));
            const T dt = (T(1) - t * t) * kC * (T(1) + T(3) * kA * x * x);
            ga[i] += dout[i] * (T(0.5) * (T(1) + t) + T(0.5) * x * dt);
          }
        }
      });
}

template <typename T>
Var Tape<T>::LayerNorm(Var x, Var gamma, Var beta) {
  const Node& nx = node(x);
  const Node& ng = node(gamma);
  const Node& nb = node(beta);
  const std::size_t r = nx.rows, c = nx.cols;
  Require(ng.rows * ng.cols == c && nb.rows * nb.cols == c,
          ErrorCode::kInvalidArgument, "layer norm gain/bias size mismatch");
  constexpr T kEps = static_cast<T>(1e-5);
  auto stats = std::make_shared<std::vector<T>>(2 * r);
  const Node* px = &nx;
  const Node* pg = &ng;
  const Node* pb = &nb;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {x, gamma, beta},
      [px, pg, pb, r, c, stats](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          const T* row = px->data + i * c;
          T mean = T(0);
          for (std::size_t j = 0; j < c; ++j) mean += row[j];
          mean /= static_cast<T>(c);
          T var = T(0);
          for (std::size_t j = 0; j < c; ++j) {
            const T dv = row[j] - mean;
            var += dv * dv;
          }
          var /= static_cast<T>(c);
          const T rstd = T(1) / std::sqrt(var + kEps);
          (*stats)[2 * i] = mean;
          (*stats)[2 * i + 1] = rstd;
          for (std::size_t j = 0; j < c; ++j) {
            out[i * c + j] = (row[j] - mean) * rstd * pg->data[j] + pb->data[j];
          }
        }
      },
      [this, x, gamma, beta, px, pg, r, c, stats, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        T* gx = GradOf(x);
        T* gg = GradOf(gamma);
        T* gb = GradOf(beta);
        std::vector<T> dxhat(c);
        for (std::size_t i = 0; i < r; ++i) {
          const T* row = px->data + i * c;
          const T mean = (*stats)[2 * i];
          const T rstd = (*stats)[2 * i + 1];
          T sum_d = T(0), sum_dx = T(0);
          for (std::size_t j = 0; j < c; ++j) {
            const T xhat = (row[j] - mean) * rstd;
            const T dy = dout[i * c + j];
            if (gg) gg[j] += dy * xhat;
            if (gb) gb[j] += dy;
            dxhat[j] = dy * pg->data[j];
            sum_d += dxhat[j];
            sum_dx += dxhat[j] * xhat;
          }
          if (gx) {
            const T inv_c = T(1) / static_cast<T>(c);
            for (std::size_t j = 0; j < c; ++j) {
              const T xhat = (row[j] - mean) * rstd;
              gx[i * c + j] +=
                  rstd * (dxhat[j] - sum_d * inv_c - xhat * sum_dx * inv_c);
            }
          }
        }
      });
}

template <typename T>
Var Tape<T>::SoftmaxRows(Var a) {
  const Node& na = node(a);
  const std::size_t r = na.rows, c = na.cols;
  Require(c > 0, ErrorCode::kInvalidArgument, "softmax over empty rows");
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {a},
      [pa, r, c](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          SoftmaxRow(pa->data + i * c, out + i * c, c);
        }
      },
      [this, a, r, c, out_id]() {
        const Node& self = nodes_[out_id];
        T* ga = GradOf(a);
        if (!ga) return;
        for (std::size_t i = 0; i < r; ++i) {
          const T* y = self.data + i * c;
          const T* dy = self.grad.data() + i * c;
          T dot = T(0);
          for (std::size_t j = 0; j < c; ++j) dot += dy[j] * y[j];
          for (std::size_t j = 0; j < c; ++j) {
            ga[i * c + j] += y[j] * (dy[j] - dot);
          }
        }
      });
}

template <typename T>
Var Tape<T>::LogSoftmaxRows(Var a) {
  const Node& na = node(a);
  const std::size_t r = na.rows, c = na.cols;
  Require(c > 0, ErrorCode::kInvalidArgument, "log-softmax over empty rows");
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {a},
      [pa, r, c](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          LogSoftmaxRow(pa->data + i * c, out + i * c, c);
        }
      },
      [this, a, r, c, out_id]() {
        const Node& self = nodes_[out_id];
        T* ga = GradOf(a);
        if (!ga) return;
        for (std::size_t i = 0; i < r; ++i) {
          const T* y = self.data + i * c;
          const T* dy = self.grad.data() + i * c;
          T total = T(0);
          for (std::size_t j = 0; j < c; ++j) total += dy[j];
          for (std::size_t j = 0; j < c; ++j) {
            ga[i * c + j] += dy[j] - std::exp(y[j]) * total;
          }
        }
      });
}

template <typename T>
Var Tape<T>::Log(Var a) {
  const Node& na = node(a);
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      na.rows, na.cols, {a},
      [pa, n](T* out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = std::log(pa->data[i]);
      },
      [this, a, pa, n, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < n; ++i) ga[i] += dout[i] / pa->data[i];
        }
      });
}

template <typename T>
Var Tape<T>::Gather(Var a, std::vector<int> columns) {
  const Node& na = node(a);
  const std::size_t r = na.rows, c = na.cols;
  Require(columns.size() == r, ErrorCode::kInvalidArgument,
          "gather needs one column index per row");
  for (int col : columns) {
    Require(col >= 0 && static_cast<std::size_t>(col) < c, ErrorCode::kIndex,
            "gather column " + std::to_string(col) + " out of range " +
                std::to_string(c));
  }
  auto cols = std::make_shared<std::vector<int>>(std::move(columns));
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, 1, {a},
      [pa, r, c, cols](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          out[i] = pa->data[i * c + static_cast<std::size_t>((*cols)[i])];
        }
      },
      [this, a, r, c, cols, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < r; ++i) {
            ga[i * c + static_cast<std::size_t>((*cols)[i])] += dout[i];
          }
        }
      });
}

template <typename T>
Var Tape<T>::Column(Var a, std::size_t column) {
  const Node& na = node(a);
  const std::size_t r = na.rows, c = na.cols;
  Require(column < c, ErrorCode::kIndex,
          "column " + std::to_string(column) + " out of range " +
              std::to_string(c));
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, 1, {a},
      [pa, r, c, column](T* out) {
        for (std::size_t i = 0; i < r; ++i) out[i] = pa->data[i * c + column];
      },
      [this, a, r, c, column, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < r; ++i) ga[i * c + column] += dout[i];
        }
      });
}

template <typename T>
Var Tape<T>::SliceRows(Var a, std::size_t begin, std::size_t count) {
  const Node& na = node(a);
  const std::size_t c = na.cols;
  Require(begin + count <= na.rows, ErrorCode::kIndex,
          "row slice [" + std::to_string(begin) + ", " +
              std::to_string(begin + count) + ") outside " +
              std::to_string(na.rows) + " rows");
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      count, c, {a},
      [pa, begin, count, c](T* out) {
        std::copy(pa->data + begin * c, pa->data + (begin + count) * c, out);
      },
      [this, a, begin, count, c, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < count * c; ++i) ga[begin * c + i] += dout[i];
        }
      });
}

template <typename T>
Var Tape<T>::ScaleRows(Var a, Var weights) {
  const Node& na = node(a);
  const Node& nw = node(weights);
  const std::size_t r = na.rows, c = na.cols;
  Require(nw.rows * nw.cols == r, ErrorCode::kInvalidArgument,
          "row weights of " + Dims(nw.rows, nw.cols) + " do not match " +
              Dims(r, c));
  const Node* pa = &na;
  const Node* pw = &nw;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      r, c, {a, weights},
      [pa, pw, r, c](T* out) {
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            out[i * c + j] = pa->data[i * c + j] * pw->data[i];
          }
        }
      },
      [this, a, weights, pa, pw, r, c, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        T* ga = GradOf(a);
        T* gw = GradOf(weights);
        for (std::size_t i = 0; i < r; ++i) {
          T acc = T(0);
          for (std::size_t j = 0; j < c; ++j) {
            if (ga) ga[i * c + j] += dout[i * c + j] * pw->data[i];
            acc += dout[i * c + j] * pa->data[i * c + j];
          }
          if (gw) gw[i] += acc;
        }
      });
}

template <typename T>
Var Tape<T>::Sum(Var a) {
  const Node& na = node(a);
  const std::size_t n = na.rows * na.cols;
  const Node* pa = &na;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      1, 1, {a},
      [pa, n](T* out) {
        T total = T(0);
        for (std::size_t i = 0; i < n; ++i) total += pa->data[i];
        out[0] = total;
      },
      [this, a, n, out_id]() {
        const T d = nodes_[out_id].grad[0];
        if (T* ga = GradOf(a)) {
          for (std::size_t i = 0; i < n; ++i) ga[i] += d;
        }
      });
}

template <typename T>
Var Tape<T>::Embedding(Var table, std::span<const int> ids) {
  const Node& nt = node(table);
  const std::size_t vocab = nt.rows, d = nt.cols;
  for (int id : ids) {
    Require(id >= 0 && static_cast<std::size_t>(id) < vocab, ErrorCode::kIndex,
            "token id " + std::to_string(id) + " outside vocabulary of " +
                std::to_string(vocab));
  }
  auto rows = std::make_shared<std::vector<int>>(ids.begin(), ids.end());
  const Node* pt = &nt;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      rows->size(), d, {table},
      [pt, d, rows](T* out) {
        for (std::size_t i = 0; i < rows->size(); ++i) {
          const T* src = pt->data + static_cast<std::size_t>((*rows)[i]) * d;
          std::copy(src, src + d, out + i * d);
        }
      },
      [this, table, d, rows, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        if (T* gt = GradOf(table)) {
          for (std::size_t i = 0; i < rows->size(); ++i) {
            T* dst = gt + static_cast<std::size_t>((*rows)[i]) * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += dout[i * d + j];
          }
        }
      });
}

template <typename T>
Var Tape<T>::Attention(Var q, Var k, Var v, std::size_t heads,
                       const AttentionMask& mask) {
  const Node& nq = node(q);
  const Node& nk = node(k);
  const Node& nv = node(v);
  const std::size_t tq = nq.rows, tk = nk.rows, d = nq.cols;
  Require(nk.cols == d && nv.cols == d && nv.rows == tk,
          ErrorCode::kInvalidArgument,
          "attention shape mismatch q" + Dims(tq, d) + " k" +
              Dims(nk.rows, nk.cols) + " v" + Dims(nv.rows, nv.cols));
  Require(heads > 0 && d % heads == 0, ErrorCode::kInvalidArgument,
          "model width " + std::to_string(d) + " not divisible by " +
              std::to_string(heads) + " heads");
  Require(tk > 0, ErrorCode::kInvalidArgument, "attention over zero keys");
  Require(mask.rows() == 0 || (mask.rows() == tq && mask.cols() == tk),
          ErrorCode::kInvalidArgument,
          "mask " + Dims(mask.rows(), mask.cols()) + " does not match scores " +
              Dims(tq, tk));
  auto probs = std::make_shared<std::vector<T>>(heads * tq * tk);
  auto mask_copy = std::make_shared<AttentionMask>(mask);
  const Node* pq = &nq;
  const Node* pk = &nk;
  const Node* pv = &nv;
  const int out_id = static_cast<int>(nodes_.size());
  return Op(
      tq, d, {q, k, v},
      [pq, pk, pv, tq, tk, d, heads, mask_copy, probs](T* out) {
        AttentionForward(pq->data, pk->data, pv->data, tq, tk, d, heads,
                         *mask_copy, probs->data(), out);
      },
      [this, q, k, v, pq, pk, pv, tq, tk, d, heads, probs, out_id]() {
        const T* dout = nodes_[out_id].grad.data();
        T* gq = GradOf(q);
        T* gk = GradOf(k);
        T* gv = GradOf(v);
        const std::size_t dh = d / heads;
        const T scale = T(1) / std::sqrt(static_cast<T>(dh));
        RowMat<T> dp(tq, tk);
        for (std::size_t h = 0; h < heads; ++h) {
          ConstMap<T> p(probs->data() + h * tq * tk, tq, tk);
          ConstStrided<T> doh(dout + h * dh, tq, dh, Eigen::OuterStride<>(d));
          ConstStrided<T> qh(pq->data + h * dh, tq, dh,
                             Eigen::OuterStride<>(d));
          ConstStrided<T> kh(pk->data + h * dh, tk, dh,
                             Eigen::OuterStride<>(d));
          ConstStrided<T> vh(pv->data + h * dh, tk, dh,
                             Eigen::OuterStride<>(d));
          if (gv) {
            MutStrided<T>(gv + h * dh, tk, dh, Eigen::OuterStride<>(d))
                .noalias() += p.transpose() * doh;
          }
          if (!gq && !gk) continue;
          dp.noalias() = doh * vh.transpose();
          for (std::size_t i = 0; i < tq; ++i) {
            T dot = T(0);
            for (std::size_t j = 0; j < tk; ++j) dot += dp(i, j) * p(i, j);
            for (std::size_t j = 0; j < tk; ++j) {
              dp(i, j) = p(i, j) * (dp(i, j) - dot) * scale;
            }
          }
          if (gq) {
            MutStrided<T>(gq + h * dh, tq, dh, Eigen::OuterStride<>(d))
                .noalias() += dp * kh;
          }
          if (gk) {
            MutStrided<T>(gk + h * dh, tk, dh, Eigen::OuterStride<>(d))
                .noalias() += dp.transpose() * qh;
          }
        }
      });
}

template <typename T>
void Tape<T>::Backward(Var loss) {
  Node& root = node(loss);
  Require(root.rows == 1 && root.cols == 1, ErrorCode::kInvalidArgument,
          "backward needs a scalar loss, got " + Dims(root.rows, root.cols));
  Require(record_gradients_, ErrorCode::kInvalidArgument,
          "tape was created without gradient recording");
  for (Node& n : nodes_) {
    if (n.requires_grad) n.grad.assign(n.rows * n.cols, T(0));
  }
  if (!root.requires_grad) return;
  root.grad[0] = T(1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.requires_grad && n.backward) n.backward();
  }
}

template <typename T>
bool Tape<T>::ReplayMatches() const {
  std::vector<T> scratch;
  for (const Node& n : nodes_) {
    if (!n.forward) continue;
    scratch.assign(n.rows * n.cols, T(0));
    n.forward(scratch.data());
    if (std::memcmp(scratch.data(), n.data, scratch.size() * sizeof(T)) != 0) {
      return false;
    }
  }
  return true;
}

template <typename T>
Tensor<T> Tape<T>::Value(Var v) const {
  const Node& n = node(v);
  return Tensor<T>({n.rows, n.cols},
                   std::vector<T>(n.data, n.data + n.rows * n.cols));
}

template <typename T>
T Tape<T>::Scalar(Var v) const {
  const Node& n = node(v);
  Require(n.rows == 1 && n.cols == 1, ErrorCode::kInvalidArgument,
          "value is not a scalar");
  return n.data[0];
}

template class Tape<float>;
template class Tape<double>;

template <typename T>
std::vector<T> Softmax(std::span<const T> logits) {
  Require(!logits.empty(), ErrorCode::kInvalidArgument, "softmax of empty vector");
  for (T x : logits) {
    Require(std::isfinite(x), ErrorCode::kInvalidArgument,
            "softmax input is not finite");
  }
  std::vector<T> out(logits.size());
  SoftmaxRow(logits.data(), out.data(), logits.size());
  return out;
}

template <typename T>
std::vector<T> LogSoftmax(std::span<const T> logits) {
  Require(!logits.empty(), ErrorCode::kInvalidArgument,
          "log-softmax of empty vector");
  for (T x : logits) {
    Require(std::isfinite(x), ErrorCode::kInvalidArgument,
            "log-softmax input is not finite");
  }
  std::vector<T> out(logits.size());
  LogSoftmaxRow(logits.data(), out.data(), logits.size());
  return out;
}

template <typename T>
T CrossEntropy(std::span<const T> logprobs, std::size_t target) {
  Require(target < logprobs.size(), ErrorCode::kIndex,
          "target " + std::to_string(target) + " outside distribution of " +
              std::to_string(logprobs.size()));
  return -logprobs[target];
}

template <typename T>
Tensor<T> Attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                    const AttentionMask& mask, std::size_t heads) {
  Tape<T> tape(false);
  Var out = tape.Attention(tape.View(q), tape.View(k), tape.View(v), heads, mask);
  return tape.Value(out);
}

template std::vector<float> Softmax(std::span<const float>);
template std::vector<double> Softmax(std::span<const double>);
template std::vector<float> LogSoftmax(std::span<const float>);
template std::vector<double> LogSoftmax(std::span<const double>);
template float CrossEntropy(std::span<const float>, std::size_t);
template double CrossEntropy(std::span<const double>, std::size_t);
template Tensor<float> Attention(const Tensor<float>&, const Tensor<float>&,
                                 const Tensor<float>&, const AttentionMask&,
                                 std::size_t);
template Tensor<double> Attention(const Tensor<double>&, const Tensor<double>&,
                                  const Tensor<double>&, const AttentionMask&,
                                  std::size_t);

}  // namespace hydra::numerics
