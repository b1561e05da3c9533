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

#ifndef ATTRIB_DOCUMENTS_H_
#define ATTRIB_DOCUMENTS_H_

#include <filesystem>
#include <string>

#include "attrib/attribution.h"
#include "attrib/report.h"

namespace attrib {

// JSON documents written by the CLI. Doubles use shortest round-trip form;
// an undefined relative error is written as the string "undefined".
std::string report_to_json(const AttributionReport& report);
std::string map_to_json(const AttributionMap& map);

// Reads the map to render: either a tensor file or an attribution map
// document (its "collapsed" tensor).
Tensor load_render_map(const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_DOCUMENTS_H_
