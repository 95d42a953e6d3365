// SPDX-License-Identifier: Apache-2.0
//
// rislsm: reservoir-computing reflection tracking for RIS-aided wideband links
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rislsm {

/// Base class of every error thrown by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct config_error : error {
    using error::error;
};

/// Shapes of matrices or vectors do not agree.
struct dimension_error : error {
    using error::error;
};

struct index_error : error {
    using error::error;
};

/// Argument outside the mathematical domain of an operation (e.g. fan-in 0).
struct domain_error : error {
    using error::error;
};

/// Operation invoked on an object in the wrong state (e.g. untrained model).
struct state_error : error {
    using error::error;
};

struct data_error : error {
    using error::error;
};

struct insufficient_data_error : error {
    using error::error;
};

/// Least-squares normal equations are singular and no ridge term was given.
struct regularization_required_error : error {
    using error::error;
};

struct search_space_error : error {
    using error::error;
};

/// Text input could not be parsed. `line` is 1-based, 0 when unknown.
struct parse_error : error {
    parse_error(const std::string& what, std::size_t line_no)
        : error(line_no ? "line " + std::to_string(line_no) + ": " + what : what), line(line_no)
    {
    }
    std::size_t line;
};

/// Binary container rejected: wrong version tag, truncated payload or bad checksum.
struct format_error : error {
    enum class kind { version, truncated, checksum, malformed };
    format_error(kind k, const std::string& what) : error(what), reason(k) {}
    kind reason;
};

} // namespace rislsm
