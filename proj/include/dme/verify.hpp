// Copyright 2026 The dmecho Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Invariant suites shared by `dmecho verify` and the test binaries.

#include <cstdint>
#include <string>
#include <vector>

#include "dme/operators.hpp"

namespace dme {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity
  double limit = 0.0;  // threshold it is compared against
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 20260117;
  int random_cases = 20;
};

/// Random Hermitian matrix with unit-variance entries.
CMatrix random_hermitian(Eigen::Index dim, std::uint64_t seed);

/// Random cluster of `sites` distinct lattice points within radius 2 and a
/// random field direction.
SpinCluster random_cluster(int sites, std::uint64_t seed);

std::vector<CheckResult> run_invariants(const VerifyOptions& options = {});

}  // namespace dme
