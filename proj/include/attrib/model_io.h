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

#ifndef ATTRIB_MODEL_IO_H_
#define ATTRIB_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "attrib/model.h"
#include "attrib/tensor.h"

namespace attrib {

// Interchange format, `.model.json`:
//   {"format_version": 1, "name": ..., "input_shape": [...], "layers": [...]}
// Numbers are written in shortest round-trip form, so save -> load reproduces
// every weight bit for bit.
Model parse_model(std::string_view text, std::string_view source = "<memory>");
Model load_model(const std::filesystem::path& path);
std::string model_to_json(const Model& model);
void save_model(const Model& model, const std::filesystem::path& path);

// Tensor files, `.tensor.json`: {"shape": [...], "data": [...]} row-major.
Tensor parse_tensor(std::string_view text, std::string_view source = "<memory>");
Tensor load_tensor(const std::filesystem::path& path);
std::string tensor_to_json(const Tensor& tensor);
void save_tensor(const Tensor& tensor, const std::filesystem::path& path);

// Whole-file helpers; InputError naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace attrib

#endif  // ATTRIB_MODEL_IO_H_
