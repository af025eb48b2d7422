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

#include "tdpm/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tdpm/csv.hpp"
#include "tdpm/datasets.hpp"
#include "tdpm/errors.hpp"

namespace tdpm {

std::string to_string(PriorMode mode) { return mode == PriorMode::kGan ? "gan" : "ct"; }
std::string to_string(GeneratorConfig config) { return config == GeneratorConfig::kShared ? "shared" : "separate"; }
std::string to_string(Method method) { return method == Method::kTdpm ? "tdpm" : "ddpm"; }

std::string to_string(NoiseScale scale) {
  switch (scale) {
    case NoiseScale::kPosterior: return "posterior";
    case NoiseScale::kBetaSqrt: return "beta_sqrt";
    case NoiseScale::kBetaLiteral: return "beta_literal";
  }
  return "posterior";
}

NoiseScale parse_noise_scale(const std::string& name) {
  if (name == "posterior") return NoiseScale::kPosterior;
  if (name == "beta_sqrt") return NoiseScale::kBetaSqrt;
  if (name == "beta_literal") return NoiseScale::kBetaLiteral;
  throw ConfigError("unknown noise_scale '" + name + "' (expected posterior, beta_sqrt or beta_literal)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_num(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw ConfigError("config key '" + key + "': invalid value '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k{
      "dataset", "data_seed", "data_size", "data_noise", "method", "schedule", "T", "beta1", "betaT",
      "cosine_s", "T_trunc", "mode", "generator", "gen_loss", "lambda", "ct_normalize", "width", "nav_width",
      "seed", "batch_size", "iterations", "epochs", "lr_gen", "lr_disc", "lr_nav", "adam_beta1", "adam_beta2",
      "adam_eps", "ema_decay", "d_steps", "grad_clip", "noise_scale", "log_every", "checkpoint_every",
      "out_dir"};
  return k;
}

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "dataset") {
    dataset = value;
  } else if (key == "data_seed") {
    data_seed = parse_num<std::uint64_t>(key, value);
  } else if (key == "data_size") {
    data_size = parse_num<std::size_t>(key, value);
  } else if (key == "data_noise") {
    data_noise = parse_num<double>(key, value);
  } else if (key == "method") {
    if (value == "tdpm") method = Method::kTdpm;
    else if (value == "ddpm") method = Method::kDdpm;
    else throw ConfigError("config key 'method': expected tdpm or ddpm, got '" + value + "'");
  } else if (key == "schedule") {
    schedule = parse_schedule_family(value);
  } else if (key == "T") {
    T = parse_num<int>(key, value);
  } else if (key == "beta1") {
    beta1 = parse_num<double>(key, value);
  } else if (key == "betaT") {
    betaT = parse_num<double>(key, value);
  } else if (key == "cosine_s") {
    cosine_s = parse_num<double>(key, value);
  } else if (key == "T_trunc") {
    T_trunc = parse_num<int>(key, value);
  } else if (key == "mode") {
    if (value == "gan") mode = PriorMode::kGan;
    else if (value == "ct") mode = PriorMode::kCt;
    else throw ConfigError("config key 'mode': expected gan or ct, got '" + value + "'");
  } else if (key == "generator") {
    if (value == "shared") generator = GeneratorConfig::kShared;
    else if (value == "separate") generator = GeneratorConfig::kSeparate;
    else throw ConfigError("config key 'generator': expected shared or separate, got '" + value + "'");
  } else if (key == "gen_loss") {
    gen_loss = parse_generator_loss(value);
  } else if (key == "lambda") {
    lambda = parse_num<double>(key, value);
  } else if (key == "ct_normalize") {
    ct_normalize = parse_bool(key, value);
  } else if (key == "width") {
    width = parse_num<std::size_t>(key, value);
  } else if (key == "nav_width") {
    nav_width = parse_num<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_num<std::uint64_t>(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_num<std::size_t>(key, value);
  } else if (key == "iterations") {
    iterations = parse_num<std::int64_t>(key, value);
  } else if (key == "epochs") {
    epochs = parse_num<std::int64_t>(key, value);
  } else if (key == "lr_gen") {
    lr_gen = parse_num<double>(key, value);
  } else if (key == "lr_disc") {
    lr_disc = parse_num<double>(key, value);
  } else if (key == "lr_nav") {
    lr_nav = parse_num<double>(key, value);
  } else if (key == "adam_beta1") {
    adam_beta1 = parse_num<double>(key, value);
  } else if (key == "adam_beta2") {
    adam_beta2 = parse_num<double>(key, value);
  } else if (key == "adam_eps") {
    adam_eps = parse_num<double>(key, value);
  } else if (key == "ema_decay") {
    ema_decay = parse_num<double>(key, value);
  } else if (key == "d_steps") {
    d_steps = parse_num<int>(key, value);
  } else if (key == "grad_clip") {
    grad_clip = parse_num<double>(key, value);
  } else if (key == "noise_scale") {
    noise_scale = parse_noise_scale(value);
  } else if (key == "log_every") {
    log_every = parse_num<std::int64_t>(key, value);
  } else if (key == "checkpoint_every") {
    checkpoint_every = parse_num<std::int64_t>(key, value);
  } else if (key == "out_dir") {
    out_dir = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  return {
      {"dataset", dataset},
      {"data_seed", std::to_string(data_seed)},
      {"data_size", std::to_string(data_size)},
      {"data_noise", format_double(data_noise)},
      {"method", to_string(method)},
      {"schedule", to_string(schedule)},
      {"T", std::to_string(T)},
      {"beta1", format_double(beta1)},
      {"betaT", format_double(betaT)},
      {"cosine_s", format_double(cosine_s)},
      {"T_trunc", std::to_string(T_trunc)},
      {"mode", to_string(mode)},
      {"generator", to_string(generator)},
      {"gen_loss", to_string(gen_loss)},
      {"lambda", format_double(lambda)},
      {"ct_normalize", ct_normalize ? "true" : "false"},
      {"width", std::to_string(width)},
      {"nav_width", std::to_string(nav_width)},
      {"seed", std::to_string(seed)},
      {"batch_size", std::to_string(batch_size)},
      {"iterations", std::to_string(iterations)},
      {"epochs", std::to_string(epochs)},
      {"lr_gen", format_double(lr_gen)},
      {"lr_disc", format_double(lr_disc)},
      {"lr_nav", format_double(lr_nav)},
      {"adam_beta1", format_double(adam_beta1)},
      {"adam_beta2", format_double(adam_beta2)},
      {"adam_eps", format_double(adam_eps)},
      {"ema_decay", format_double(ema_decay)},
      {"d_steps", std::to_string(d_steps)},
      {"grad_clip", format_double(grad_clip)},
      {"noise_scale", to_string(noise_scale)},
      {"log_every", std::to_string(log_every)},
      {"checkpoint_every", std::to_string(checkpoint_every)},
      {"out_dir", out_dir},
  };
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  const auto kv = to_map();
  for (const auto& key : keys()) os << key << " = " << kv.at(key) << '\n';
  return os.str();
}

TrainConfig TrainConfig::from_map(const std::map<std::string, std::string>& kv) {
  TrainConfig c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return c;
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

std::int64_t TrainConfig::total_iterations() const {
  if (epochs > 0) {
    const auto per_epoch = static_cast<std::int64_t>((data_size + batch_size - 1) / batch_size);
    return epochs * per_epoch;
  }
  return iterations;
}

int TrainConfig::model_max_t() const { return method == Method::kTdpm ? T_trunc + 1 : T; }

void TrainConfig::validate() const {
  bool known = false;
  for (const auto& n : dataset_names()) known = known || n == dataset;
  if (!known) make_dataset(dataset, 1, -1.0, 0);  // throws listing valid names
  if (data_size < 1) throw ConfigError("data_size must be >= 1");
  if (T < 1) throw ConfigError("T must be >= 1");
  if (schedule == ScheduleFamily::kLinear && !(beta1 > 0.0 && beta1 <= betaT && betaT < 1.0)) {
    throw ConfigError("linear schedule requires 0 < beta1 <= betaT < 1");
  }
  if (schedule == ScheduleFamily::kCosine && !(cosine_s > 0.0)) throw ConfigError("cosine_s must be positive");
  if (method == Method::kTdpm && (T_trunc < 0 || T_trunc >= T)) {
    throw ConfigError("T_trunc must satisfy 0 <= T_trunc < T (got T_trunc=" + std::to_string(T_trunc) +
                      ", T=" + std::to_string(T) + ")");
  }
  if (width < 1 || nav_width < 1) throw ConfigError("network widths must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (iterations < 0 || epochs < 0) throw ConfigError("iteration budget must be >= 0");
  for (double lr : {lr_gen, lr_disc, lr_nav}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must lie in (0, 1)");
  if (d_steps < 1) throw ConfigError("d_steps must be >= 1");
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be >= 0");
  if (log_every < 0 || checkpoint_every < 0) throw ConfigError("cadences must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
}

}  // namespace tdpm
