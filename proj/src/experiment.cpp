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

#include "tdpm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "tdpm/csv.hpp"
#include "tdpm/errors.hpp"

namespace tdpm {

std::uint64_t sampling_seed(std::uint64_t train_seed) { return derive_seed(train_seed, 0x5A4D504C45ULL); }

SampleRun sample_trained(const TrainState& state, std::size_t n, std::uint64_t seed, const std::set<int>& record) {
  const SamplingModels models = ema_models(state);
  const NoiseScale scale = state.config.noise_scale;
  if (state.config.method == Method::kDdpm) {
    return sample_ddpm_baseline(models, *state.schedule, n, seed, record, scale);
  }
  return sample_tdpm(models, TruncatedSchedule(state.schedule, state.config.T_trunc), n, seed, record, scale);
}

KlRecord evaluate_kl(const TrainState& state, std::span<const double> samples) {
  std::vector<double> data;
  data.reserve(state.data.size() * 2);
  for (const auto& p : state.data.points) {
    data.push_back(p[0]);
    data.push_back(p[1]);
  }
  const GridHistogram q = histogram(data);
  const GridHistogram p = histogram(samples);
  KlRecord r;
  r.dataset = state.config.dataset;
  r.method = state.config.method == Method::kDdpm ? "ddpm" : "tdpm-" + to_string(state.config.mode);
  r.T = state.config.T;
  r.T_trunc = state.config.method == Method::kDdpm ? state.config.T : state.config.T_trunc;
  r.seed = state.config.seed;
  r.kl_nats = forward_kl(q, p);
  r.overflow_frac = p.overflow_fraction();
  return r;
}

ToyRun run_toy(const TrainConfig& config, std::size_t n) {
  ToyRun run;
  const auto start = std::chrono::steady_clock::now();
  run.state = train(config);
  run.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.samples = sample_trained(run.state, n, sampling_seed(config.seed)).samples;
  run.kl = evaluate_kl(run.state, run.samples);
  return run;
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("TDPM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = worker_threads();
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double median(std::vector<double> v) {
  if (v.empty()) throw ContractError("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double ToyComparison::tdpm_median() const { return median(tdpm_kl); }
double ToyComparison::ddpm_median() const { return median(ddpm_kl); }

std::size_t ToyComparison::tdpm_wins() const {
  std::size_t wins = 0;
  for (std::size_t i = 0; i < tdpm_kl.size(); ++i) wins += tdpm_kl[i] < ddpm_kl[i];
  return wins;
}

std::vector<ToyComparison> reproduce_toy(const TrainConfig& base, const std::vector<std::pair<int, int>>& chains,
                                         std::size_t k, std::size_t n_samples, std::size_t threads) {
  if (k < 1) throw ConfigError("reproduce-toy: need at least one seed");
  struct Job {
    std::size_t chain;
    std::size_t seed_index;
    bool baseline;
  };
  std::vector<Job> jobs;
  std::vector<TrainConfig> configs;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (std::size_t s = 0; s < k; ++s) {
      for (bool baseline : {false, true}) {
        TrainConfig cfg = base;
        cfg.T = chains[c].first;
        cfg.T_trunc = chains[c].second;
        cfg.seed = base.seed + s;
        cfg.method = baseline ? Method::kDdpm : Method::kTdpm;
        cfg.out_dir.clear();
        cfg.validate();
        jobs.push_back({c, s, baseline});
        configs.push_back(cfg);
      }
    }
  }
  std::vector<KlRecord> results(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) { results[i] = run_toy(configs[i], n_samples).kl; });

  std::vector<ToyComparison> out(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    out[c].dataset = base.dataset;
    out[c].T = chains[c].first;
    out[c].T_trunc = chains[c].second;
    out[c].mode = base.mode;
    out[c].tdpm_kl.assign(k, 0.0);
    out[c].ddpm_kl.assign(k, 0.0);
    out[c].tdpm_overflow.assign(k, 0.0);
    out[c].ddpm_overflow.assign(k, 0.0);
    for (std::size_t s = 0; s < k; ++s) out[c].seeds.push_back(base.seed + s);
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ToyComparison& c = out[jobs[i].chain];
    const std::size_t s = jobs[i].seed_index;
    (jobs[i].baseline ? c.ddpm_kl : c.tdpm_kl)[s] = results[i].kl_nats;
    (jobs[i].baseline ? c.ddpm_overflow : c.tdpm_overflow)[s] = results[i].overflow_frac;
  }
  return out;
}

std::string comparison_csv_header() {
  return "dataset,mode,T,T_trunc,seeds,tdpm_median_kl,ddpm_median_kl,tdpm_wins,tdpm_kl,ddpm_kl";
}

std::string comparison_csv_row(const ToyComparison& c) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
    return s;
  };
  std::ostringstream os;
  os << c.dataset << ',' << to_string(c.mode) << ',' << c.T << ',' << c.T_trunc << ',' << c.seeds.size() << ','
     << format_double(c.tdpm_median()) << ',' << format_double(c.ddpm_median()) << ',' << c.tdpm_wins() << ','
     << join(c.tdpm_kl) << ',' << join(c.ddpm_kl);
  return os.str();
}

}  // namespace tdpm
