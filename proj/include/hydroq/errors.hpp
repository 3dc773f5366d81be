// Copyright 2025 The hydroq authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace hydroq {

/// Invalid argument values (bad shapes, negative sigma, dk <= 0, ...).
struct parameter_error : std::invalid_argument {
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Problem too large for an exact method (brute force caps, ...).
struct size_error : std::invalid_argument {
    explicit size_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Coupling structure does not match what the algorithm requires.
struct structure_error : std::invalid_argument {
    explicit structure_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Hardware graph cannot host the requested embedding.
struct capacity_error : std::runtime_error {
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

/// Linear system is singular (e.g. no fixed-head boundary).
struct illposed_error : std::runtime_error {
    explicit illposed_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hydroq
