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

#ifndef HYDRA_NUMERICS_TAPE_H_
#define HYDRA_NUMERICS_TAPE_H_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hydra/numerics/tensor.h"

namespace hydra::numerics {

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode computation record. Every primitive appends one node holding
// its forward value, a forward closure (used by Replay) and, when gradients
// are recorded, a backward closure. Values are 2-D row-major matrices; a
// scalar is 1x1.
//
// Single-writer: one Tape belongs to one thread.
template <typename T>
class Tape {
 public:
  explicit Tape(bool record_gradients = true)
      : record_gradients_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool records_gradients() const { return record_gradients_; }

  // Leaves.
  Var Constant(const Tensor<T>& value);
  Var Constant(std::size_t rows, std::size_t cols, std::vector<T> values);
  // References external storage without copying; the tensor must outlive
  // the tape. Receives no gradient.
  Var View(const Tensor<T>& value);
  // Gradients accumulate into parameter.grad on Backward. Repeated calls with
  // the same parameter return the same node.
  Var Param(const Parameter<T>& parameter);

  // Primitives.
  Var MatMul(Var a, Var b);
  Var Add(Var a, Var b);
  Var AddBias(Var a, Var bias);
  Var Mul(Var a, Var b);
  Var Scale(Var a, T factor);
  Var Gelu(Var a);
  Var LayerNorm(Var x, Var gamma, Var beta);
  Var SoftmaxRows(Var a);
  Var LogSoftmaxRows(Var a);
  Var Log(Var a);
  // out[i] = a[i, columns[i]]; result is rows x 1.
  Var Gather(Var a, std::vector<int> columns);
  Var Column(Var a, std::size_t column);
  Var SliceRows(Var a, std::size_t begin, std::size_t count);
  // Multiplies row i of `a` by weights[i] (weights is rows x 1).
  Var ScaleRows(Var a, Var weights);
  Var Sum(Var a);
  Var Embedding(Var table, std::span<const int> ids);
  // Multi-head scaled dot-product attention. q is Tq x d, k and v are Tk x d,
  // d divisible by heads. mask may be empty (no masking) or Tq x Tk.
  Var Attention(Var q, Var k, Var v, std::size_t heads,
                const AttentionMask& mask);

  // Seeds d(loss)/d(loss) = 1 and runs every backward closure in reverse
  // order. loss must be 1x1.
  void Backward(Var loss);

  // Recomputes every op node from its recorded inputs and reports whether
  // all values match bit-for-bit.
  bool ReplayMatches() const;

  std::size_t rows(Var v) const { return node(v).rows; }
  std::size_t cols(Var v) const { return node(v).cols; }
  std::span<const T> data(Var v) const {
    const Node& n = node(v);
    return std::span<const T>(n.data, n.rows * n.cols);
  }
  std::span<const T> grad(Var v) const { return node(v).grad; }
  Tensor<T> Value(Var v) const;
  T Scalar(Var v) const;
  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> storage;
    const T* data = nullptr;
    std::vector<T> grad;
    bool requires_grad = false;
    const Parameter<T>* parameter = nullptr;
    std::function<void(T*)> forward;
    std::function<void()> backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  Var Leaf(std::size_t rows, std::size_t cols, std::vector<T> values);
  // Appends an op node, runs `forward` into its storage and keeps `backward`
  // when any input needs a gradient.
  Var Op(std::size_t rows, std::size_t cols, std::initializer_list<Var> inputs,
         std::function<void(T*)> forward, std::function<void()> backward);
  // Gradient buffer of an input node, or nullptr if it needs none.
  T* GradOf(Var v);

  bool record_gradients_;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, int> param_nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

// Plain-value helpers (no recording).
template <typename T>
std::vector<T> Softmax(std::span<const T> logits);
template <typename T>
std::vector<T> LogSoftmax(std::span<const T> logits);
// -logprobs[target]; logprobs must be the log of a distribution.
template <typename T>
T CrossEntropy(std::span<const T> logprobs, std::size_t target);
template <typename T>
Tensor<T> Attention(const Tensor<T>& q, const Tensor<T>& k,
                    const Tensor<T>& v, const AttentionMask& mask,
                    std::size_t heads = 1);

}  // namespace hydra::numerics

#endif  // HYDRA_NUMERICS_TAPE_H_
