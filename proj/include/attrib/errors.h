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

#ifndef ATTRIB_ERRORS_H_
#define ATTRIB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace attrib {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, bad arguments, shape and index errors. The CLI maps these
// to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

// Non-finite values produced during evaluation or differentiation. The CLI
// maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace attrib

#endif  // ATTRIB_ERRORS_H_
