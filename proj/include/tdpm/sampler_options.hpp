// Copyright 2026 The TDPM Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

namespace tdpm {

// Standard deviation of the noise injected by a reverse step t >= 2.
enum class NoiseScale {
  kPosterior,    // sqrt(posterior variance)
  kBetaSqrt,     // sqrt(beta_t)
  kBetaLiteral,  // beta_t itself
};

std::string to_string(NoiseScale scale);
NoiseScale parse_noise_scale(const std::string& name);

}  // namespace tdpm
