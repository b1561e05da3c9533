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

#ifndef ATTRIB_MODEL_H_
#define ATTRIB_MODEL_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "attrib/autodiff.h"
#include "attrib/tensor.h"

namespace attrib {

enum class LayerKind { kLinear, kConv2d, kRelu, kSigmoid, kSoftmax, kMaxPool2d, kAvgPool2d, kFlatten };

std::string_view layer_kind_name(LayerKind kind);
// Throws InputError for names outside the interchange vocabulary.
LayerKind parse_layer_kind(std::string_view name);

// One layer of a sequential model. Only the fields relevant to `kind` are
// meaningful: `in`/`out` are features for linear layers and channels for
// conv2d; `kernel`/`stride` apply to conv2d and pools; `padding` to conv2d.
struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  std::size_t in = 0;
  std::size_t out = 0;
  Extent2 kernel{0, 0};
  Extent2 stride{1, 1};
  Extent2 padding{0, 0};
  std::shared_ptr<const Tensor> weights;
  std::shared_ptr<const Tensor> bias;

  static LayerSpec of(LayerKind kind) {
    LayerSpec spec;
    spec.kind = kind;
    return spec;
  }
  static LayerSpec linear(Tensor weights, Tensor bias);
  static LayerSpec conv2d(Tensor weights, Tensor bias, Extent2 stride = {1, 1},
                          Extent2 padding = {0, 0});
  static LayerSpec relu() { return of(LayerKind::kRelu); }
  static LayerSpec sigmoid() { return of(LayerKind::kSigmoid); }
  static LayerSpec softmax() { return of(LayerKind::kSoftmax); }
  static LayerSpec flatten() { return of(LayerKind::kFlatten); }
  static LayerSpec maxpool2d(Extent2 kernel, Extent2 stride);
  static LayerSpec avgpool2d(Extent2 kernel, Extent2 stride);

  bool is_normalization() const {
    return kind == LayerKind::kSoftmax || kind == LayerKind::kSigmoid;
  }

  // Checks weight shapes against the declared extents (ShapeError).
  void validate_parameters() const;

  // The primitive sequence implementing this layer.
  std::vector<Primitive> primitives() const;
};

// Immutable sequential network. Construction validates that consecutive layer
// shapes compose and that every weight is finite.
class Model {
 public:
  Model(std::string name, Shape input_shape, std::vector<LayerSpec> layers);

  const std::string& name() const { return name_; }
  const Shape& input_shape() const { return input_shape_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }

  // Shape of the activation after the first `count` layers (count = 0 gives
  // the input shape).
  const Shape& shape_after(std::size_t count) const { return shapes_.at(count); }
  const Shape& output_shape() const { return shapes_.back(); }

  // Applies layers [begin, end) to `x` without recording a tape.
  Tensor forward_range(const Tensor& x, std::size_t begin, std::size_t end) const;
  Tensor forward(const Tensor& x) const { return forward_range(x, 0, layers_.size()); }

 private:
  std::string name_;
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
};

enum class TargetSpace { kLogit, kProb };

// Which scalar of the network output is explained. `kLogit` evaluates the
// network with a trailing softmax/sigmoid removed; `kProb` requires one.
struct TargetSelector {
  std::size_t index = 0;
  TargetSpace space = TargetSpace::kLogit;

  // "3:logit", "0:prob"; a bare index means logit.
  static TargetSelector parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const TargetSelector&, const TargetSelector&) = default;
};

struct TailEvaluation {
  double value = 0.0;
  Tape tape;
  NodeId feature;
  NodeId output;
  std::size_t component = 0;

  // d value / d feature.
  Tensor gradient() const { return tape.backward(output, component, feature); }
};

// A model partitioned at `split_index` into a head (layers before the split)
// and a tail (layers from the split on). The view borrows the model, which
// must outlive it.
class SplitView {
 public:
  SplitView(const Model& model, std::size_t split_index);

  const Model& model() const { return *model_; }
  std::size_t split_index() const { return split_index_; }
  const Shape& feature_shape() const { return model_->shape_after(split_index_); }

  Tensor forward_head(const Tensor& x) const;
  TailEvaluation forward_tail(const Tensor& features, TargetSelector target) const;

  // Layer range [split_index, end) evaluated by the tail for `target`.
  std::size_t tail_end(TargetSelector target) const;

 private:
  const Model* model_;
  std::size_t split_index_;
};

inline SplitView split(const Model& model, std::size_t split_index) {
  return SplitView(model, split_index);
}

}  // namespace attrib

#endif  // ATTRIB_MODEL_H_
