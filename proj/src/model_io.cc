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

#include "attrib/model_io.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <utility>

#include "attrib/errors.h"
#include "json.hpp"

namespace attrib {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

// Location of a value inside a document, used in error messages.
class FieldPath {
 public:
  FieldPath(std::string source, std::string path) : source_(std::move(source)), path_(std::move(path)) {}

  FieldPath operator/(std::string_view key) const {
    return {source_, path_.empty() ? std::string(key) : path_ + "." + std::string(key)};
  }
  FieldPath operator[](std::size_t i) const {
    return {source_, path_ + "[" + std::to_string(i) + "]"};
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw InputError(source_ + ": field '" + (path_.empty() ? "<root>" : path_) + "': " + message);
  }

 private:
  std::string source_;
  std::string path_;
};

json parse_document(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": parse error: " + e.what());
  } catch (const json::exception& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
}

const json& require(const json& obj, std::string_view key, const FieldPath& at) {
  if (!obj.is_object()) at.fail("expected an object");
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) (at / key).fail("missing required field");
  return *it;
}

std::size_t as_extent(const json& value, const FieldPath& at) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    at.fail("expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

double as_number(const json& value, const FieldPath& at) {
  if (!value.is_number()) at.fail("expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) at.fail("non-finite value");
  return v;
}

Shape as_shape(const json& value, const FieldPath& at) {
  if (!value.is_array() || value.empty()) at.fail("expected a non-empty array of extents");
  Shape shape;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::size_t e = as_extent(value[i], at[i]);
    if (e == 0) at[i].fail("extents must be positive");
    shape.push_back(e);
  }
  return shape;
}

Extent2 as_pair(const json& value, const FieldPath& at) {
  if (!value.is_array() || value.size() != 2) at.fail("expected a pair [a, b]");
  return {as_extent(value[0], at[0]), as_extent(value[1], at[1])};
}

void flatten_nested(const json& value, const Shape& shape, std::size_t depth, const FieldPath& at,
                    std::vector<double>& out) {
  if (depth == shape.size()) {
    out.push_back(as_number(value, at));
    return;
  }
  if (!value.is_array() || value.size() != shape[depth]) {
    at.fail("expected an array of " + std::to_string(shape[depth]) + " elements (shape " +
            shape_string(shape) + ")");
  }
  for (std::size_t i = 0; i < value.size(); ++i) flatten_nested(value[i], shape, depth + 1, at[i], out);
}

Tensor nested_tensor(const json& value, const Shape& shape, const FieldPath& at) {
  std::vector<double> data;
  data.reserve(shape_size(shape));
  flatten_nested(value, shape, 0, at, data);
  return Tensor(shape, std::move(data));
}

json nested_json(const Tensor& t, std::size_t depth, std::size_t offset) {
  const Shape& shape = t.shape();
  json arr = json::array();
  std::size_t stride = 1;
  for (std::size_t d = depth + 1; d < shape.size(); ++d) stride *= shape[d];
  for (std::size_t i = 0; i < shape[depth]; ++i) {
    if (depth + 1 == shape.size()) {
      arr.push_back(t[offset + i]);
    } else {
      arr.push_back(nested_json(t, depth + 1, offset + i * stride));
    }
  }
  return arr;
}

LayerSpec parse_layer(const json& obj, const FieldPath& at) {
  if (!obj.is_object()) at.fail("expected a layer object");
  const json& kind_value = require(obj, "kind", at);
  if (!kind_value.is_string()) (at / "kind").fail("expected a string");
  LayerKind kind;
  try {
    kind = parse_layer_kind(kind_value.get<std::string>());
  } catch (const InputError& e) {
    (at / "kind").fail(e.what());
  }
  try {
    switch (kind) {
      case LayerKind::kLinear: {
        const std::size_t in = as_extent(require(obj, "in", at), at / "in");
        const std::size_t out = as_extent(require(obj, "out", at), at / "out");
        if (in == 0 || out == 0) at.fail("'in' and 'out' must be positive");
        return LayerSpec::linear(nested_tensor(require(obj, "weights", at), {out, in}, at / "weights"),
                                 nested_tensor(require(obj, "bias", at), {out}, at / "bias"));
      }
      case LayerKind::kConv2d: {
        const std::size_t in = as_extent(require(obj, "in_channels", at), at / "in_channels");
        const std::size_t out = as_extent(require(obj, "out_channels", at), at / "out_channels");
        const Extent2 kernel = as_pair(require(obj, "kernel", at), at / "kernel");
        const Extent2 stride = as_pair(require(obj, "stride", at), at / "stride");
        const Extent2 padding = as_pair(require(obj, "padding", at), at / "padding");
        if (in == 0 || out == 0 || kernel[0] == 0 || kernel[1] == 0) {
          at.fail("channels and kernel extents must be positive");
        }
        return LayerSpec::conv2d(
            nested_tensor(require(obj, "weights", at), {out, in, kernel[0], kernel[1]}, at / "weights"),
            nested_tensor(require(obj, "bias", at), {out}, at / "bias"), stride, padding);
      }
      case LayerKind::kMaxPool2d:
      case LayerKind::kAvgPool2d: {
        const Extent2 kernel = as_pair(require(obj, "kernel", at), at / "kernel");
        const Extent2 stride = as_pair(require(obj, "stride", at), at / "stride");
        return kind == LayerKind::kMaxPool2d ? LayerSpec::maxpool2d(kernel, stride)
                                             : LayerSpec::avgpool2d(kernel, stride);
      }
      default:
        return LayerSpec{kind};
    }
  } catch (const ShapeError& e) {
    at.fail(e.what());
  }
}

json layer_to_json(const LayerSpec& layer) {
  json obj;
  obj["kind"] = std::string(layer_kind_name(layer.kind));
  switch (layer.kind) {
    case LayerKind::kLinear:
      obj["in"] = layer.in;
      obj["out"] = layer.out;
      obj["weights"] = nested_json(*layer.weights, 0, 0);
      obj["bias"] = nested_json(*layer.bias, 0, 0);
      break;
    case LayerKind::kConv2d:
      obj["in_channels"] = layer.in;
      obj["out_channels"] = layer.out;
      obj["kernel"] = {layer.kernel[0], layer.kernel[1]};
      obj["stride"] = {layer.stride[0], layer.stride[1]};
      obj["padding"] = {layer.padding[0], layer.padding[1]};
      obj["weights"] = nested_json(*layer.weights, 0, 0);
      obj["bias"] = nested_json(*layer.bias, 0, 0);
      break;
    case LayerKind::kMaxPool2d:
    case LayerKind::kAvgPool2d:
      obj["kernel"] = {layer.kernel[0], layer.kernel[1]};
      obj["stride"] = {layer.stride[0], layer.stride[1]};
      break;
    default:
      break;
  }
  return obj;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

Model parse_model(std::string_view text, std::string_view source) {
  const json doc = parse_document(text, source);
  const FieldPath root(std::string(source), "");
  const json& version = require(doc, "format_version", root);
  if (!version.is_number_integer() || version.get<long long>() != kFormatVersion) {
    (root / "format_version").fail("unsupported format version (expected 1)");
  }
  const json& name = require(doc, "name", root);
  if (!name.is_string()) (root / "name").fail("expected a string");
  Shape input_shape = as_shape(require(doc, "input_shape", root), root / "input_shape");
  const json& layers_json = require(doc, "layers", root);
  if (!layers_json.is_array()) (root / "layers").fail("expected an array");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i < layers_json.size(); ++i) {
    layers.push_back(parse_layer(layers_json[i], (root / "layers")[i]));
  }
  try {
    return Model(name.get<std::string>(), std::move(input_shape), std::move(layers));
  } catch (const ShapeError& e) {
    throw ShapeError(std::string(source) + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
}

Model load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.string());
}

std::string model_to_json(const Model& model) {
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
  out += "  \"name\": " + json(model.name()).dump() + ",\n";
  out += "  \"input_shape\": " + json(model.input_shape()).dump() + ",\n";
  out += "  \"layers\": [\n";
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    out += "    " + layer_to_json(model.layers()[i]).dump();
    out += i + 1 < model.layer_count() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

Tensor parse_tensor(std::string_view text, std::string_view source) {
  const json doc = parse_document(text, source);
  const FieldPath root(std::string(source), "");
  Shape shape = as_shape(require(doc, "shape", root), root / "shape");
  const json& data = require(doc, "data", root);
  if (!data.is_array()) (root / "data").fail("expected a flat array of numbers");
  if (data.size() != shape_size(shape)) {
    (root / "data").fail("length " + std::to_string(data.size()) + " does not match shape " +
                         shape_string(shape));
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) values.push_back(as_number(data[i], (root / "data")[i]));
  return Tensor(std::move(shape), std::move(values));
}

Tensor load_tensor(const std::filesystem::path& path) {
  return parse_tensor(read_text_file(path), path.string());
}

std::string tensor_to_json(const Tensor& tensor) {
  json doc;
  doc["shape"] = tensor.shape();
  doc["data"] = tensor.values();
  return doc.dump() + "\n";
}

void save_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  write_text_file(path, tensor_to_json(tensor));
}

}  // namespace attrib
