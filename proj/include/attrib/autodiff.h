/*
 * Copyright 2026 The attrib Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTRIB_AUTODIFF_H_
#define ATTRIB_AUTODIFF_H_

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "attrib/tensor.h"

namespace attrib {

using Extent2 = std::array<std::size_t, 2>;

// Primitive operations. Every primitive is unary in its differentiable
// argument; weights are constants shared with the owning model.

// y = W x for rank-1 x; W is [out, in].
struct Linear {
  std::shared_ptr<const Tensor> weights;
};

// Cross-correlation over a [C, H, W] input; weights are [out, in, kh, kw].
struct Conv2d {
  std::shared_ptr<const Tensor> weights;
  Extent2 stride{1, 1};
  Extent2 padding{0, 0};
};

// Adds bias[c] to every element of slice c along axis 0.
struct AddBias {
  std::shared_ptr<const Tensor> bias;
};

struct Relu {};
struct Sigmoid {};
// Softmax over all elements of the argument.
struct Softmax {};

struct MaxPool2d {
  Extent2 kernel{2, 2};
  Extent2 stride{2, 2};
};

struct AvgPool2d {
  Extent2 kernel{2, 2};
  Extent2 stride{2, 2};
};

struct Flatten {};

using Primitive = std::variant<Linear, Conv2d, AddBias, Relu, Sigmoid, Softmax,
                               MaxPool2d, AvgPool2d, Flatten>;

std::string primitive_name(const Primitive& op);

// Throws ShapeError when `in` is not a valid argument shape for `op`.
Shape output_shape(const Primitive& op, const Shape& in);

// Forward kernel. Shared by the tape and by untaped evaluation so that both
// paths produce bitwise-identical values.
Tensor apply(const Primitive& op, const Tensor& in);

// Vector-Jacobian product: given dL/d(out), returns dL/d(in).
Tensor vjp(const Primitive& op, const Tensor& in, const Tensor& out,
           const Tensor& grad_out);

struct NodeId {
  std::size_t index = 0;
  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

// Linear record of executed primitives. Nodes are appended in execution order
// and keep their values for the backward pass.
class Tape {
 public:
  NodeId input(Tensor value, std::string label = "input");

  // Evaluates `op` on the value of `arg` and records it. Errors name `label`
  // (or the primitive when no label is given).
  NodeId apply(const Primitive& op, NodeId arg, std::string label = {});

  const Tensor& value(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  // Gradient of component `component` of node `output` with respect to every
  // element of node `wrt`.
  Tensor backward(NodeId output, std::size_t component, NodeId wrt) const;

  // Vector-Jacobian product with an arbitrary seed shaped like `output`.
  // When `visited` is non-null, the ids of the operation nodes processed are
  // appended in processing order.
  Tensor backward(NodeId output, const Tensor& seed, NodeId wrt,
                  std::vector<NodeId>* visited = nullptr) const;

  // Smallest distance of any recorded ReLU argument from 0 and of any max-pool
  // window maximum from its runner-up. Entries a ReLU clamped to 0 do not
  // compete inside a max-pool window. Infinite when the tape has no kinks.
  double kink_margin() const;

 private:
  struct Node {
    std::optional<Primitive> op;
    NodeId arg;
    Tensor value;
    std::string label;
  };

  void check_id(NodeId id, const char* role) const;

  std::vector<Node> nodes_;
};

// A straight-line program of primitives. Value slots 0..inputs-1 hold the
// inputs; instruction i writes slot inputs + i.
struct Instruction {
  Primitive op;
  std::size_t arg = 0;
  std::string label;
};

struct OpSequence {
  std::vector<Shape> input_shapes;
  std::vector<Instruction> instructions;
  std::vector<std::size_t> outputs;
};

struct ForwardResult {
  std::vector<Tensor> outputs;
  Tape tape;
  std::vector<NodeId> input_nodes;
  std::vector<NodeId> output_nodes;
};

ForwardResult forward_eval(const OpSequence& ops, std::span<const Tensor> inputs);

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f,
                            const Tensor& x, double h);

}  // namespace attrib

#endif  // ATTRIB_AUTODIFF_H_
