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

#include "attrib/model.h"

#include <charconv>
#include <utility>

#include "attrib/errors.h"

namespace attrib {

namespace {

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::kLinear, "linear"},       {LayerKind::kConv2d, "conv2d"},
    {LayerKind::kRelu, "relu"},           {LayerKind::kSigmoid, "sigmoid"},
    {LayerKind::kSoftmax, "softmax"},     {LayerKind::kMaxPool2d, "maxpool2d"},
    {LayerKind::kAvgPool2d, "avgpool2d"}, {LayerKind::kFlatten, "flatten"},
};

std::shared_ptr<const Tensor> share(Tensor t) {
  return std::make_shared<const Tensor>(std::move(t));
}

}  // namespace

std::string_view layer_kind_name(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw InputError("unsupported layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::linear(Tensor weights, Tensor bias) {
  LayerSpec spec{LayerKind::kLinear};
  if (weights.rank() != 2) throw ShapeError("linear weights must be [out, in]");
  spec.out = weights.shape()[0];
  spec.in = weights.shape()[1];
  spec.weights = share(std::move(weights));
  spec.bias = share(std::move(bias));
  spec.validate_parameters();
  return spec;
}

LayerSpec LayerSpec::conv2d(Tensor weights, Tensor bias, Extent2 stride, Extent2 padding) {
  LayerSpec spec{LayerKind::kConv2d};
  if (weights.rank() != 4) throw ShapeError("conv2d weights must be [out, in, kh, kw]");
  spec.out = weights.shape()[0];
  spec.in = weights.shape()[1];
  spec.kernel = {weights.shape()[2], weights.shape()[3]};
  spec.stride = stride;
  spec.padding = padding;
  spec.weights = share(std::move(weights));
  spec.bias = share(std::move(bias));
  spec.validate_parameters();
  return spec;
}

LayerSpec LayerSpec::maxpool2d(Extent2 kernel, Extent2 stride) {
  LayerSpec spec{LayerKind::kMaxPool2d};
  spec.kernel = kernel;
  spec.stride = stride;
  spec.validate_parameters();
  return spec;
}

LayerSpec LayerSpec::avgpool2d(Extent2 kernel, Extent2 stride) {
  LayerSpec spec{LayerKind::kAvgPool2d};
  spec.kernel = kernel;
  spec.stride = stride;
  spec.validate_parameters();
  return spec;
}

void LayerSpec::validate_parameters() const {
  const std::string name(layer_kind_name(kind));
  switch (kind) {
    case LayerKind::kLinear:
    case LayerKind::kConv2d: {
      if (!weights || !bias) throw ShapeError(name + ": missing weights or bias");
      if (in == 0 || out == 0) throw ShapeError(name + ": extents must be positive");
      Shape expected = kind == LayerKind::kLinear ? Shape{out, in}
                                                  : Shape{out, in, kernel[0], kernel[1]};
      if (weights->shape() != expected) {
        throw ShapeError(name + ": weights shape " + shape_string(weights->shape()) +
                         " does not match declared " + shape_string(expected));
      }
      if (bias->shape() != Shape{out}) {
        throw ShapeError(name + ": bias shape " + shape_string(bias->shape()) +
                         " does not match declared [" + std::to_string(out) + "]");
      }
      if (kind == LayerKind::kConv2d && (stride[0] == 0 || stride[1] == 0)) {
        throw ShapeError(name + ": stride must be positive");
      }
      break;
    }
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      if (kernel[0] == 0 || kernel[1] == 0 || stride[0] == 0 || stride[1] == 0) {
        throw ShapeError(name + ": kernel and stride must be positive");
      }
      break;
    default:
      break;
  }
}

std::vector<Primitive> LayerSpec::primitives() const {
  switch (kind) {
    case LayerKind::kLinear:
      return {Linear{weights}, AddBias{bias}};
    case LayerKind::kConv2d:
      return {Conv2d{weights, stride, padding}, AddBias{bias}};
    case LayerKind::kRelu:
      return {Relu{}};
    case LayerKind::kSigmoid:
      return {Sigmoid{}};
    case LayerKind::kSoftmax:
      return {Softmax{}};
    case LayerKind::kMaxPool2d:
      return {MaxPool2d{kernel, stride}};
    case LayerKind::kAvgPool2d:
      return {AvgPool2d{kernel, stride}};
    case LayerKind::kFlatten:
      return {Flatten{}};
  }
  return {};
}

Model::Model(std::string name, Shape input_shape, std::vector<LayerSpec> layers)
    : name_(std::move(name)), input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (layers_.empty()) throw InputError("model '" + name_ + "' has no layers");
  if (input_shape_.empty() || shape_size(input_shape_) == 0) {
    throw ShapeError("model '" + name_ + "': input shape must have positive extents");
  }
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& layer = layers_[i];
    layer.validate_parameters();
    for (const auto& param : {layer.weights, layer.bias}) {
      if (param && !param->all_finite()) {
        throw InputError("layer " + std::to_string(i) + " (" +
                             std::string(layer_kind_name(layer.kind)) + ") has a non-finite weight");
      }
    }
    Shape shape = shapes_.back();
    try {
      for (const Primitive& op : layer.primitives()) shape = attrib::output_shape(op, shape);
    } catch (const ShapeError& e) {
      const std::string here = std::to_string(i) + " (" + std::string(layer_kind_name(layer.kind)) + ")";
      if (i == 0) {
        throw ShapeError("input shape " + shape_string(input_shape_) +
                         " is incompatible with layer " + here + ": " + e.what());
      }
      throw ShapeError("shape composition error between layers (" + std::to_string(i - 1) + ", " +
                       std::to_string(i) + "): layer " + std::to_string(i - 1) + " produces " +
                       shape_string(shapes_.back()) + " but layer " + here + " rejects it: " +
                       e.what());
    }
    shapes_.push_back(std::move(shape));
  }
}

Tensor Model::forward_range(const Tensor& x, std::size_t begin, std::size_t end) const {
  if (begin > end || end > layers_.size()) throw InputError("layer range out of bounds");
  if (x.shape() != shapes_[begin]) {
    throw ShapeError("expected activation of shape " + shape_string(shapes_[begin]) + " at layer " +
                     std::to_string(begin) + ", got " + shape_string(x.shape()));
  }
  Tensor value = x;
  for (std::size_t i = begin; i < end; ++i) {
    for (const Primitive& op : layers_[i].primitives()) {
      value = attrib::apply(op, value);
      value.check_finite("layer " + std::to_string(i) + " (" +
                         std::string(layer_kind_name(layers_[i].kind)) + ")");
    }
  }
  return value;
}

TargetSelector TargetSelector::parse(std::string_view text) {
  TargetSelector target;
  std::string_view index_part = text;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    index_part = text.substr(0, colon);
    const std::string_view space = text.substr(colon + 1);
    if (space == "logit") {
      target.space = TargetSpace::kLogit;
    } else if (space == "prob") {
      target.space = TargetSpace::kProb;
    } else {
      throw InputError("target space must be 'logit' or 'prob', got '" + std::string(space) + "'");
    }
  }
  const auto [ptr, ec] =
      std::from_chars(index_part.data(), index_part.data() + index_part.size(), target.index);
  if (ec != std::errc() || ptr != index_part.data() + index_part.size() || index_part.empty()) {
    throw InputError("invalid target '" + std::string(text) + "' (expected INDEX[:logit|prob])");
  }
  return target;
}

std::string TargetSelector::to_string() const {
  return std::to_string(index) + (space == TargetSpace::kLogit ? ":logit" : ":prob");
}

SplitView::SplitView(const Model& model, std::size_t split_index)
    : model_(&model), split_index_(split_index) {
  if (split_index > model.layer_count()) {
    throw InputError("split index " + std::to_string(split_index) + " out of range [0, " +
                     std::to_string(model.layer_count()) + "]");
  }
}

Tensor SplitView::forward_head(const Tensor& x) const {
  return model_->forward_range(x, 0, split_index_);
}

std::size_t SplitView::tail_end(TargetSelector target) const {
  const std::size_t n = model_->layer_count();
  const bool normalized = model_->layers().back().is_normalization();
  if (target.space == TargetSpace::kProb) {
    if (!normalized) {
      throw InputError("target space 'prob' requires the model to end in softmax or sigmoid");
    }
    return n;
  }
  if (!normalized) return n;
  if (split_index_ == n) {
    throw InputError("target space 'logit' is unavailable when splitting after the final " +
                     std::string(layer_kind_name(model_->layers().back().kind)));
  }
  return n - 1;
}

TailEvaluation SplitView::forward_tail(const Tensor& features, TargetSelector target) const {
  const std::size_t end = tail_end(target);
  if (features.shape() != feature_shape()) {
    throw ShapeError("features of shape " + shape_string(features.shape()) +
                     " do not match split feature shape " + shape_string(feature_shape()));
  }
  const std::size_t outputs = shape_size(model_->shape_after(end));
  if (target.index >= outputs) {
    throw InputError("target index " + std::to_string(target.index) + " out of range for " +
                     std::to_string(outputs) + " outputs");
  }
  TailEvaluation eval;
  eval.feature = eval.tape.input(features, "features");
  NodeId node = eval.feature;
  for (std::size_t i = split_index_; i < end; ++i) {
    const LayerSpec& layer = model_->layers()[i];
    const std::string label =
        "layer " + std::to_string(i) + " (" + std::string(layer_kind_name(layer.kind)) + ")";
    for (const Primitive& op : layer.primitives()) node = eval.tape.apply(op, node, label);
  }
  eval.output = node;
  eval.component = target.index;
  eval.value = eval.tape.value(node)[target.index];
  return eval;
}

}  // namespace attrib
