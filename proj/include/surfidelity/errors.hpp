// Copyright 2026 The surfidelity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace surfidelity {

/// An exhaustive engine was asked to enumerate more states than its budget allows.
struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A pair coupling has no representation as a plaquette-variable bond.
struct DualMappingUndefined : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Complex couplings reached a sampler that needs positive weights.
struct SignProblem : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Both amplitudes vanish.
struct UndefinedFidelity : std::domain_error {
    using std::domain_error::domain_error;
};

}  // namespace surfidelity
