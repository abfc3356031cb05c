// Copyright 2026 The SignFed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace signfed {

// Built-in invariant suite behind `signfed verify`. fast mode divides the
// Monte-Carlo sample counts by 10 and widens the matching tolerances by
// sqrt(10).
struct VerifyOptions {
  bool fast = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options);

// Prints one pass/fail line per check; returns 0 iff all passed.
int print_verification(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace signfed
