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

#include "tdpm/eval.hpp"

#include <cmath>
#include <sstream>

#include "tdpm/csv.hpp"
#include "tdpm/errors.hpp"

namespace tdpm {

double GridHistogram::overflow_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(overflow) / static_cast<double>(total());
}

bool GridHistogram::same_geometry(const GridHistogram& o) const {
  return lo == o.lo && hi == o.hi && bins == o.bins && probs.size() == o.probs.size();
}

GridHistogram histogram(std::span<const double> xy, double eps) {
  if (xy.size() % 2 != 0) throw ShapeError("histogram: expected a flat [n, 2] buffer");
  if (!(eps > 0.0)) throw ContractError("histogram: smoothing eps must be positive");
  GridHistogram h;
  h.eps = eps;
  const std::size_t nb = h.bins * h.bins;
  h.counts.assign(nb, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(h.bins);
  for (std::size_t k = 0; k + 1 < xy.size(); k += 2) {
    const double x = xy[k], y = xy[k + 1];
    if (!(x >= h.lo && x < h.hi && y >= h.lo && y < h.hi)) {
      ++h.overflow;
      continue;
    }
    const auto i = std::min(static_cast<std::size_t>((x - h.lo) / width), h.bins - 1);
    const auto j = std::min(static_cast<std::size_t>((y - h.lo) / width), h.bins - 1);
    ++h.counts[i * h.bins + j];
    ++h.in_range;
  }
  h.probs.resize(nb);
  const double norm = static_cast<double>(h.in_range) + static_cast<double>(nb) * eps;
  for (std::size_t b = 0; b < nb; ++b) h.probs[b] = (static_cast<double>(h.counts[b]) + eps) / norm;
  return h;
}

double forward_kl(const GridHistogram& q, const GridHistogram& p) {
  if (!q.same_geometry(p)) throw ContractError("forward_kl: histograms have different grids");
  double kl = 0.0;
  for (std::size_t b = 0; b < q.probs.size(); ++b) kl += q.probs[b] * std::log(q.probs[b] / p.probs[b]);
  return std::max(kl, 0.0);
}

std::vector<SnrRow> snr_report(const NoiseSchedule& schedule, std::span<const int> ts) {
  std::vector<SnrRow> rows;
  rows.reserve(ts.size());
  for (int t : ts) rows.push_back({t, snr(schedule, t)});
  return rows;
}

std::string kl_csv_header() { return "dataset,method,T,T_trunc,seed,kl_nats,overflow_frac"; }

std::string kl_csv_row(const KlRecord& r) {
  std::ostringstream os;
  os << r.dataset << ',' << r.method << ',' << r.T << ',' << r.T_trunc << ',' << r.seed << ','
     << format_double(r.kl_nats) << ',' << format_double(r.overflow_frac);
  return os.str();
}

}  // namespace tdpm
