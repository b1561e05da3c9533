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

#include "attrib/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "attrib/errors.h"

namespace attrib {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Geometry2d {
  std::size_t channels, height, width, out_height, out_width;
};

// Output geometry of a sliding window over a [C, H, W] argument.
Geometry2d window_geometry(const char* name, const Shape& in, Extent2 kernel,
                           Extent2 stride, Extent2 padding) {
  if (in.size() != 3) {
    throw ShapeError(std::string(name) + " expects a [C, H, W] argument, got " +
                     shape_string(in));
  }
  if (kernel[0] == 0 || kernel[1] == 0 || stride[0] == 0 || stride[1] == 0) {
    throw ShapeError(std::string(name) + ": kernel and stride must be positive");
  }
  const std::size_t padded_h = in[1] + 2 * padding[0];
  const std::size_t padded_w = in[2] + 2 * padding[1];
  if (padded_h < kernel[0] || padded_w < kernel[1]) {
    throw ShapeError(std::string(name) + ": kernel larger than padded input " +
                     shape_string(in));
  }
  return {in[0], in[1], in[2], (padded_h - kernel[0]) / stride[0] + 1,
          (padded_w - kernel[1]) / stride[1] + 1};
}

void require_weights(const std::shared_ptr<const Tensor>& w, const char* name) {
  if (!w) throw ShapeError(std::string(name) + ": missing weights");
}

// Flat index of the first maximal element of window (oy, ox) in channel c.
std::size_t window_argmax(const Tensor& in, const Geometry2d& g, const MaxPool2d& p,
                          std::size_t c, std::size_t oy, std::size_t ox) {
  std::size_t best = c * g.height * g.width + (oy * p.stride[0]) * g.width + ox * p.stride[1];
  for (std::size_t ky = 0; ky < p.kernel[0]; ++ky) {
    for (std::size_t kx = 0; kx < p.kernel[1]; ++kx) {
      const std::size_t idx =
          c * g.height * g.width + (oy * p.stride[0] + ky) * g.width + ox * p.stride[1] + kx;
      if (in[idx] > in[best]) best = idx;
    }
  }
  return best;
}

}  // namespace

std::string primitive_name(const Primitive& op) {
  return std::visit(Overloaded{
                        [](const Linear&) { return "linear"; },
                        [](const Conv2d&) { return "conv2d"; },
                        [](const AddBias&) { return "add_bias"; },
                        [](const Relu&) { return "relu"; },
                        [](const Sigmoid&) { return "sigmoid"; },
                        [](const Softmax&) { return "softmax"; },
                        [](const MaxPool2d&) { return "maxpool2d"; },
                        [](const AvgPool2d&) { return "avgpool2d"; },
                        [](const Flatten&) { return "flatten"; },
                    },
                    op);
}

Shape output_shape(const Primitive& op, const Shape& in) {
  return std::visit(
      Overloaded{
          [&](const Linear& l) -> Shape {
            require_weights(l.weights, "linear");
            const Shape& w = l.weights->shape();
            if (w.size() != 2) throw ShapeError("linear: weights must be [out, in]");
            if (in.size() != 1 || in[0] != w[1]) {
              throw ShapeError("linear: expected argument [" + std::to_string(w[1]) +
                               "], got " + shape_string(in));
            }
            return {w[0]};
          },
          [&](const Conv2d& c) -> Shape {
            require_weights(c.weights, "conv2d");
            const Shape& w = c.weights->shape();
            if (w.size() != 4) throw ShapeError("conv2d: weights must be [out, in, kh, kw]");
            const Geometry2d g =
                window_geometry("conv2d", in, {w[2], w[3]}, c.stride, c.padding);
            if (g.channels != w[1]) {
              throw ShapeError("conv2d: expected " + std::to_string(w[1]) +
                               " input channels, got " + shape_string(in));
            }
            return {w[0], g.out_height, g.out_width};
          },
          [&](const AddBias& b) -> Shape {
            require_weights(b.bias, "add_bias");
            if (b.bias->rank() != 1 || b.bias->size() != in[0]) {
              throw ShapeError("add_bias: bias of shape " + shape_string(b.bias->shape()) +
                               " does not match leading extent of " + shape_string(in));
            }
            return in;
          },
          [&](const Relu&) { return in; },
          [&](const Sigmoid&) { return in; },
          [&](const Softmax&) { return in; },
          [&](const MaxPool2d& p) -> Shape {
            const Geometry2d g = window_geometry("maxpool2d", in, p.kernel, p.stride, {0, 0});
            return {g.channels, g.out_height, g.out_width};
          },
          [&](const AvgPool2d& p) -> Shape {
            const Geometry2d g = window_geometry("avgpool2d", in, p.kernel, p.stride, {0, 0});
            return {g.channels, g.out_height, g.out_width};
          },
          [&](const Flatten&) -> Shape { return {shape_size(in)}; },
      },
      op);
}

Tensor apply(const Primitive& op, const Tensor& in) {
  Tensor out(output_shape(op, in.shape()));
  std::visit(
      Overloaded{
          [&](const Linear& l) {
            const Tensor& w = *l.weights;
            const std::size_t rows = w.shape()[0], cols = w.shape()[1];
            for (std::size_t i = 0; i < rows; ++i) {
              double acc = 0.0;
              for (std::size_t j = 0; j < cols; ++j) acc += w[i * cols + j] * in[j];
              out[i] = acc;
            }
          },
          [&](const Conv2d& c) {
            const Tensor& w = *c.weights;
            const std::size_t kh = w.shape()[2], kw = w.shape()[3];
            const Geometry2d g = window_geometry("conv2d", in.shape(), {kh, kw}, c.stride, c.padding);
            const std::size_t oc = w.shape()[0];
            for (std::size_t o = 0; o < oc; ++o) {
              for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                  double acc = 0.0;
                  for (std::size_t ch = 0; ch < g.channels; ++ch) {
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                      const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * c.stride[0] + ky) -
                                                static_cast<std::ptrdiff_t>(c.padding[0]);
                      if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
                      for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * c.stride[1] + kx) -
                                                  static_cast<std::ptrdiff_t>(c.padding[1]);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
                        acc += w[((o * g.channels + ch) * kh + ky) * kw + kx] *
                               in[(ch * g.height + iy) * g.width + ix];
                      }
                    }
                  }
                  out[(o * g.out_height + oy) * g.out_width + ox] = acc;
                }
              }
            }
          },
          [&](const AddBias& b) {
            const std::size_t inner = in.size() / in.shape()[0];
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] + (*b.bias)[i / inner];
          },
          [&](const Relu&) {
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
          },
          [&](const Sigmoid&) {
            for (std::size_t i = 0; i < in.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-in[i]));
          },
          [&](const Softmax&) {
            double peak = in[0];
            for (double v : in.data()) peak = std::max(peak, v);
            double total = 0.0;
            for (std::size_t i = 0; i < in.size(); ++i) {
              out[i] = std::exp(in[i] - peak);
              total += out[i];
            }
            for (double& v : out.data()) v /= total;
          },
          [&](const MaxPool2d& p) {
            const Geometry2d g = window_geometry("maxpool2d", in.shape(), p.kernel, p.stride, {0, 0});
            std::size_t k = 0;
            for (std::size_t c = 0; c < g.channels; ++c)
              for (std::size_t oy = 0; oy < g.out_height; ++oy)
                for (std::size_t ox = 0; ox < g.out_width; ++ox)
                  out[k++] = in[window_argmax(in, g, p, c, oy, ox)];
          },
          [&](const AvgPool2d& p) {
            const Geometry2d g = window_geometry("avgpool2d", in.shape(), p.kernel, p.stride, {0, 0});
            const double count = static_cast<double>(p.kernel[0] * p.kernel[1]);
            std::size_t k = 0;
            for (std::size_t c = 0; c < g.channels; ++c) {
              for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                  double acc = 0.0;
                  for (std::size_t ky = 0; ky < p.kernel[0]; ++ky)
                    for (std::size_t kx = 0; kx < p.kernel[1]; ++kx)
                      acc += in[(c * g.height + oy * p.stride[0] + ky) * g.width +
                                ox * p.stride[1] + kx];
                  out[k++] = acc / count;
                }
              }
            }
          },
          [&](const Flatten&) { std::copy(in.data().begin(), in.data().end(), out.data().begin()); },
      },
      op);
  return out;
}

Tensor vjp(const Primitive& op, const Tensor& in, const Tensor& out, const Tensor& grad_out) {
  Tensor grad_in(in.shape());
  std::visit(
      Overloaded{
          [&](const Linear& l) {
            const Tensor& w = *l.weights;
            const std::size_t rows = w.shape()[0], cols = w.shape()[1];
            for (std::size_t i = 0; i < rows; ++i)
              for (std::size_t j = 0; j < cols; ++j) grad_in[j] += w[i * cols + j] * grad_out[i];
          },
          [&](const Conv2d& c) {
            const Tensor& w = *c.weights;
            const std::size_t kh = w.shape()[2], kw = w.shape()[3];
            const Geometry2d g = window_geometry("conv2d", in.shape(), {kh, kw}, c.stride, c.padding);
            const std::size_t oc = w.shape()[0];
            for (std::size_t o = 0; o < oc; ++o) {
              for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                  const double go = grad_out[(o * g.out_height + oy) * g.out_width + ox];
                  for (std::size_t ch = 0; ch < g.channels; ++ch) {
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                      const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * c.stride[0] + ky) -
                                                static_cast<std::ptrdiff_t>(c.padding[0]);
                      if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
                      for (std::size_t kx = 0; kx < kw; ++kx) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * c.stride[1] + kx) -
                                                  static_cast<std::ptrdiff_t>(c.padding[1]);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
                        grad_in[(ch * g.height + iy) * g.width + ix] +=
                            w[((o * g.channels + ch) * kh + ky) * kw + kx] * go;
                      }
                    }
                  }
                }
              }
            }
          },
          [&](const AddBias&) { grad_in = grad_out; },
          [&](const Relu&) {
            for (std::size_t i = 0; i < in.size(); ++i) grad_in[i] = in[i] > 0.0 ? grad_out[i] : 0.0;
          },
          [&](const Sigmoid&) {
            for (std::size_t i = 0; i < in.size(); ++i) grad_in[i] = grad_out[i] * out[i] * (1.0 - out[i]);
          },
          [&](const Softmax&) {
            double dot = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) dot += grad_out[i] * out[i];
            for (std::size_t i = 0; i < out.size(); ++i) grad_in[i] = out[i] * (grad_out[i] - dot);
          },
          [&](const MaxPool2d& p) {
            const Geometry2d g = window_geometry("maxpool2d", in.shape(), p.kernel, p.stride, {0, 0});
            std::size_t k = 0;
            for (std::size_t c = 0; c < g.channels; ++c)
              for (std::size_t oy = 0; oy < g.out_height; ++oy)
                for (std::size_t ox = 0; ox < g.out_width; ++ox)
                  grad_in[window_argmax(in, g, p, c, oy, ox)] += grad_out[k++];
          },
          [&](const AvgPool2d& p) {
            const Geometry2d g = window_geometry("avgpool2d", in.shape(), p.kernel, p.stride, {0, 0});
            const double count = static_cast<double>(p.kernel[0] * p.kernel[1]);
            std::size_t k = 0;
            for (std::size_t c = 0; c < g.channels; ++c) {
              for (std::size_t oy = 0; oy < g.out_height; ++oy) {
                for (std::size_t ox = 0; ox < g.out_width; ++ox) {
                  const double share = grad_out[k++] / count;
                  for (std::size_t ky = 0; ky < p.kernel[0]; ++ky)
                    for (std::size_t kx = 0; kx < p.kernel[1]; ++kx)
                      grad_in[(c * g.height + oy * p.stride[0] + ky) * g.width +
                              ox * p.stride[1] + kx] += share;
                }
              }
            }
          },
          [&](const Flatten&) { grad_in = grad_out.reshaped(in.shape()); },
      },
      op);
  return grad_in;
}

NodeId Tape::input(Tensor value, std::string label) {
  nodes_.push_back(Node{std::nullopt, NodeId{nodes_.size()}, std::move(value), std::move(label)});
  return NodeId{nodes_.size() - 1};
}

NodeId Tape::apply(const Primitive& op, NodeId arg, std::string label) {
  check_id(arg, "argument");
  if (label.empty()) label = primitive_name(op);
  const Tensor& in = nodes_[arg.index].value;
  Tensor out;
  try {
    out = attrib::apply(op, in);
  } catch (const ShapeError& e) {
    throw ShapeError("operation '" + label + "': " + e.what());
  }
  out.check_finite("operation '" + label + "'");
  nodes_.push_back(Node{op, arg, std::move(out), std::move(label)});
  return NodeId{nodes_.size() - 1};
}

const Tensor& Tape::value(NodeId id) const {
  check_id(id, "node");
  return nodes_[id.index].value;
}

void Tape::check_id(NodeId id, const char* role) const {
  if (id.index >= nodes_.size()) {
    throw InputError(std::string("unknown tape ") + role + " id " + std::to_string(id.index) +
                     " (tape has " + std::to_string(nodes_.size()) + " nodes)");
  }
}

Tensor Tape::backward(NodeId output, std::size_t component, NodeId wrt) const {
  check_id(output, "output");
  const Tensor& out = nodes_[output.index].value;
  if (component >= out.size()) {
    throw InputError("output component " + std::to_string(component) + " out of range for shape " +
                     shape_string(out.shape()));
  }
  Tensor seed(out.shape());
  seed[component] = 1.0;
  return backward(output, seed, wrt);
}

Tensor Tape::backward(NodeId output, const Tensor& seed, NodeId wrt,
                      std::vector<NodeId>* visited) const {
  check_id(output, "output");
  check_id(wrt, "wrt");
  if (seed.shape() != nodes_[output.index].value.shape()) {
    throw ShapeError("backward seed shape " + shape_string(seed.shape()) +
                     " does not match output shape " +
                     shape_string(nodes_[output.index].value.shape()));
  }
  if (wrt.index > output.index) return Tensor(nodes_[wrt.index].value.shape());

  // Empty tensors stand for zero adjoints.
  std::vector<Tensor> adjoint(output.index + 1);
  adjoint[output.index] = seed;
  for (std::size_t i = output.index; i > wrt.index; --i) {
    const Node& node = nodes_[i];
    if (!node.op || adjoint[i].empty()) continue;
    if (visited) visited->push_back(NodeId{i});
    const std::size_t a = node.arg.index;
    Tensor grad = vjp(*node.op, nodes_[a].value, node.value, adjoint[i]);
    if (adjoint[a].empty()) {
      adjoint[a] = std::move(grad);
    } else {
      for (std::size_t k = 0; k < grad.size(); ++k) adjoint[a][k] += grad[k];
    }
    adjoint[i] = Tensor();
  }
  Tensor result = adjoint[wrt.index].empty() ? Tensor(nodes_[wrt.index].value.shape())
                                             : std::move(adjoint[wrt.index]);
  result.check_finite("backward through '" + nodes_[output.index].label + "'");
  return result;
}

double Tape::kink_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (const Node& node : nodes_) {
    if (!node.op) continue;
    const Tensor& in = nodes_[node.arg.index].value;
    if (std::holds_alternative<Relu>(*node.op)) {
      for (double v : in.data()) margin = std::min(margin, std::abs(v));
    } else if (const auto* p = std::get_if<MaxPool2d>(&*node.op)) {
      const Geometry2d g = window_geometry("maxpool2d", in.shape(), p->kernel, p->stride, {0, 0});
      if (p->kernel[0] * p->kernel[1] < 2) continue;
      // Zeros clamped by a preceding ReLU stay put under small perturbations,
      // so ties among them are not kinks; the ReLU term covers their motion.
      const Node& source = nodes_[node.arg.index];
      const bool clamped = source.op && std::holds_alternative<Relu>(*source.op);
      for (std::size_t c = 0; c < g.channels; ++c) {
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const std::size_t best = window_argmax(in, g, *p, c, oy, ox);
            if (clamped && in[best] == 0.0) continue;
            double runner_up = -std::numeric_limits<double>::infinity();
            for (std::size_t ky = 0; ky < p->kernel[0]; ++ky) {
              for (std::size_t kx = 0; kx < p->kernel[1]; ++kx) {
                const std::size_t idx = (c * g.height + oy * p->stride[0] + ky) * g.width +
                                        ox * p->stride[1] + kx;
                if (idx == best || (clamped && in[idx] == 0.0)) continue;
                runner_up = std::max(runner_up, in[idx]);
              }
            }
            margin = std::min(margin, in[best] - runner_up);
          }
        }
      }
    }
  }
  return margin;
}

ForwardResult forward_eval(const OpSequence& ops, std::span<const Tensor> inputs) {
  if (inputs.size() != ops.input_shapes.size()) {
    throw ShapeError("forward_eval: expected " + std::to_string(ops.input_shapes.size()) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  ForwardResult result;
  std::vector<NodeId> slots;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].shape() != ops.input_shapes[i]) {
      throw ShapeError("forward_eval: input " + std::to_string(i) + " has shape " +
                       shape_string(inputs[i].shape()) + ", declared " +
                       shape_string(ops.input_shapes[i]));
    }
    inputs[i].check_finite("forward_eval input " + std::to_string(i));
    slots.push_back(result.tape.input(inputs[i], "input " + std::to_string(i)));
  }
  result.input_nodes = slots;
  for (std::size_t k = 0; k < ops.instructions.size(); ++k) {
    const Instruction& ins = ops.instructions[k];
    std::string label = ins.label.empty()
                            ? primitive_name(ins.op) + " #" + std::to_string(k)
                            : ins.label;
    if (ins.arg >= slots.size()) {
      throw ShapeError("operation '" + label + "' reads undefined slot " + std::to_string(ins.arg));
    }
    slots.push_back(result.tape.apply(ins.op, slots[ins.arg], std::move(label)));
  }
  for (std::size_t slot : ops.outputs) {
    if (slot >= slots.size()) throw ShapeError("forward_eval: undefined output slot " + std::to_string(slot));
    result.output_nodes.push_back(slots[slot]);
    result.outputs.push_back(result.tape.value(slots[slot]));
  }
  return result;
}

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                            double h) {
  if (!(h > 0.0)) throw InputError("finite_diff_gradient: step must be positive");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("finite_diff_gradient: non-finite function value probing coordinate " +
                           std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace attrib
