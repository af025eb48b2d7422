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

#include "tdpm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdpm/config.hpp"
#include "tdpm/csv.hpp"
#include "tdpm/datasets.hpp"
#include "tdpm/errors.hpp"
#include "tdpm/eval.hpp"
#include "tdpm/experiment.hpp"
#include "tdpm/sampler.hpp"
#include "tdpm/trainer.hpp"

namespace tdpm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Manifest {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  json seeds = json::object();
  std::vector<std::string> artifacts;
  json extra = json::object();

  void write(const fs::path& path, Clock::time_point start) const {
    json j;
    j["command"] = command;
    j["args"] = args;
    j["config"] = config;
    j["seeds"] = seeds;
    j["artifacts"] = artifacts;
    j["wall_clock_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    j["version"] = kVersion;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_file_atomic(path, j.dump(2) + "\n");
  }
};

// One --key option per TrainConfig field, minus the ones a command defines itself.
std::map<std::string, std::string>& add_config_flags(CLI::App& cmd, std::map<std::string, std::string>& storage,
                                                     const std::set<std::string>& skip = {}) {
  for (const auto& key : TrainConfig::keys()) {
    if (skip.count(key)) continue;
    cmd.add_option("--" + key, storage[key], "config key " + key);
  }
  return storage;
}

void apply_flags(TrainConfig& config, const CLI::App& cmd, const std::map<std::string, std::string>& storage) {
  for (const auto& [key, value] : storage) {
    if (cmd.count("--" + key) > 0) config.set(key, value);
  }
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + tok + "' is not an integer");
    }
  }
  return out;
}

std::set<int> parse_record(const std::string& text, int t_trunc, int T) {
  std::set<int> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "Ttrunc" || tok == "T_trunc") {
      out.insert(t_trunc);
    } else if (tok == "T") {
      out.insert(T);
    } else {
      for (int v : parse_int_list(tok, "--record")) out.insert(v);
    }
  }
  return out;
}

std::vector<double> flatten(const Dataset2D& d) {
  std::vector<double> xy;
  xy.reserve(d.size() * 2);
  for (const auto& p : d.points) {
    xy.push_back(p[0]);
    xy.push_back(p[1]);
  }
  return xy;
}

void append_csv_row(const fs::path& path, const std::string& header, const std::string& row) {
  const bool fresh = !fs::exists(path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open '" + path.string() + "' for appending");
  if (fresh) out << header << '\n';
  out << row << '\n';
  if (!out.flush()) throw IoError("write failed for '" + path.string() + "'");
}

// ---- subcommands --------------------------------------------------------

struct GenerateArgs {
  std::string dataset;
  std::size_t n = DatasetConstants::kDefaultSize;
  std::uint64_t seed = 0;
  double noise = -1.0;
  std::string out;
};

int cmd_generate_data(const GenerateArgs& a, std::ostream& out) {
  const Dataset2D d = make_dataset(a.dataset, a.n, a.noise, a.seed);
  write_points_csv(a.out, d);
  out << "wrote " << d.size() << " points to " << a.out << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string config;
  std::string resume;
  std::map<std::string, std::string> flags;
};

int cmd_train(const TrainArgs& a, const CLI::App& cmd, const std::vector<std::string>& argv, std::ostream& out) {
  const auto start = Clock::now();
  TrainState state;
  if (!a.resume.empty()) {
    if (!a.config.empty()) throw ConfigError("--config and --resume are exclusive; a checkpoint carries its config");
    state = load_checkpoint(a.resume);
    static const std::set<std::string> resumable{"iterations", "epochs", "out_dir", "log_every", "checkpoint_every"};
    for (const auto& [key, value] : a.flags) {
      if (cmd.count("--" + key) == 0) continue;
      if (!resumable.count(key)) throw ConfigError("config key '" + key + "' cannot change when resuming");
      state.config.set(key, value);
    }
    state.config.validate();
  } else {
    TrainConfig config = a.config.empty() ? TrainConfig{} : TrainConfig::load(a.config);
    apply_flags(config, cmd, a.flags);
    config.validate();
    state = init_state(config);
  }
  if (state.config.out_dir.empty()) throw ConfigError("out_dir is required (config key or --out_dir)");
  const fs::path dir(state.config.out_dir);
  fs::create_directories(dir);
  const std::int64_t resumed_at = state.iteration;
  train(state, {.on_log = [&out](std::int64_t it, const LossReport& r) { out << loss_log_row(it, r) << '\n'; }});

  Manifest m;
  m.command = "train";
  m.args = argv;
  m.config = state.config.to_map();
  m.seeds = {{"seed", state.config.seed}, {"data_seed", state.config.data_seed}};
  m.artifacts = {(dir / "train_log.csv").string(), (dir / "final.bin").string()};
  m.extra = {{"iterations", state.iteration}, {"resumed_from", resumed_at}, {"resume", a.resume}};
  m.write(dir / "manifest.json", start);
  out << "trained to iteration " << state.iteration << "; checkpoint " << (dir / "final.bin").string() << '\n';
  return kExitOk;
}

struct SampleArgs {
  std::string checkpoint;
  std::size_t n = kEvalSamples;
  std::uint64_t seed = 0;
  std::string record;
  bool baseline = false;
  std::string out;
  std::string noise_scale;
};

int cmd_sample(const SampleArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const auto start = Clock::now();
  TrainState state = load_checkpoint(a.checkpoint);
  const bool ddpm = state.config.method == Method::kDdpm;
  if (a.baseline && !ddpm) throw ContractError("--baseline given but the checkpoint holds TDPM networks");
  if (!a.baseline && ddpm) throw ContractError("checkpoint holds a DDPM baseline; pass --baseline");
  if (!a.noise_scale.empty()) state.config.noise_scale = parse_noise_scale(a.noise_scale);
  const int t_top = ddpm ? state.config.T : state.config.T_trunc;
  const std::set<int> record = parse_record(a.record, state.config.T_trunc, state.config.T);
  check_record_set(record, t_top);

  const SampleRun run = sample_trained(state, a.n, a.seed, record);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  Manifest m;
  const fs::path final_path = dir / "samples_t0.csv";
  write_points_csv(final_path, run.samples);
  m.artifacts.push_back(final_path.string());
  for (const auto& [t, xy] : run.trajectory) {
    if (t == 0) continue;
    const fs::path p = dir / ("samples_t" + std::to_string(t) + ".csv");
    write_points_csv(p, xy);
    m.artifacts.push_back(p.string());
  }
  m.command = "sample";
  m.args = argv;
  m.config = state.config.to_map();
  m.seeds = {{"sample_seed", a.seed}, {"train_seed", state.config.seed}};
  m.extra = {{"nfe", run.nfe}, {"n", a.n}, {"checkpoint", a.checkpoint}, {"baseline", a.baseline},
             {"record", std::vector<int>(record.rbegin(), record.rend())}};
  m.write(dir / "manifest.json", start);
  out << "wrote " << a.n << " samples to " << final_path.string() << " (nfe=" << run.nfe << ")\n";
  return kExitOk;
}

struct EvalArgs {
  std::string data;
  std::string samples;
  std::string out;
  KlRecord labels;
};

int cmd_eval_kl(const EvalArgs& a, std::ostream& out) {
  const Dataset2D data = read_points_csv(a.data);
  const Dataset2D samples = read_points_csv(a.samples);
  const GridHistogram q = histogram(flatten(data));
  const GridHistogram p = histogram(flatten(samples));
  KlRecord r = a.labels;
  r.kl_nats = forward_kl(q, p);
  r.overflow_frac = p.overflow_fraction();
  out << kl_csv_header() << '\n' << kl_csv_row(r) << '\n';
  if (!a.out.empty()) append_csv_row(a.out, kl_csv_header(), kl_csv_row(r));
  return kExitOk;
}

struct ReproduceArgs {
  std::string config;
  std::string dataset = "swiss_roll";
  std::string T = "2,5";
  std::string T_trunc = "1,4";
  std::string mode = "gan";
  std::size_t seeds = 5;
  std::int64_t epochs = 5000;
  std::size_t n = kEvalSamples;
  std::size_t threads = 0;
  std::string out;
  std::map<std::string, std::string> flags;
};

int cmd_reproduce_toy(const ReproduceArgs& a, const CLI::App& cmd, const std::vector<std::string>& argv,
                      std::ostream& out) {
  const auto start = Clock::now();
  TrainConfig base = a.config.empty() ? TrainConfig{} : TrainConfig::load(a.config);
  apply_flags(base, cmd, a.flags);
  base.dataset = a.dataset;
  base.set("mode", a.mode);
  base.epochs = a.epochs;
  const auto Ts = parse_int_list(a.T, "--T");
  const auto Tts = parse_int_list(a.T_trunc, "--T_trunc");
  if (Ts.size() != Tts.size() || Ts.empty()) throw ConfigError("--T and --T_trunc need the same number of entries");
  std::vector<std::pair<int, int>> chains;
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    TrainConfig probe = base;
    probe.T = Ts[i];
    probe.T_trunc = Tts[i];
    probe.validate();
    chains.emplace_back(Ts[i], Tts[i]);
  }
  const auto table = reproduce_toy(base, chains, a.seeds, a.n, a.threads);

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::string kl_rows = kl_csv_header() + "\n";
  std::string comparison = comparison_csv_header() + "\n";
  for (const auto& c : table) {
    for (std::size_t s = 0; s < c.seeds.size(); ++s) {
      kl_rows += kl_csv_row({c.dataset, "tdpm-" + to_string(c.mode), c.T, c.T_trunc, c.seeds[s], c.tdpm_kl[s],
                             c.tdpm_overflow[s]}) + "\n";
      kl_rows += kl_csv_row({c.dataset, "ddpm", c.T, c.T, c.seeds[s], c.ddpm_kl[s], c.ddpm_overflow[s]}) + "\n";
    }
    comparison += comparison_csv_row(c) + "\n";
  }
  write_file_atomic(dir / "kl.csv", kl_rows);
  write_file_atomic(dir / "comparison.csv", comparison);
  out << comparison;

  Manifest m;
  m.command = "reproduce-toy";
  m.args = argv;
  m.config = base.to_map();
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < a.seeds; ++s) seeds.push_back(base.seed + s);
  m.seeds = {{"train_seeds", seeds}, {"data_seed", base.data_seed}};
  m.artifacts = {(dir / "kl.csv").string(), (dir / "comparison.csv").string()};
  m.extra = {{"n_samples", a.n}};
  m.write(dir / "manifest.json", start);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truncated diffusion models on 2-D toy data", "tdpm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "write a toy dataset as CSV");
  g->add_option("--dataset", gen.dataset, "swiss_roll | double_moons | gmm8 | gmm25")->required();
  g->add_option("--n", gen.n, "number of points");
  g->add_option("--seed", gen.seed);
  g->add_option("--noise", gen.noise, "noise level; negative selects the dataset default");
  g->add_option("--out", gen.out, "output CSV")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train TDPM or the DDPM baseline");
  t->add_option("--config", tr.config, "key = value config file");
  t->add_option("--resume", tr.resume, "checkpoint to continue from");
  add_config_flags(*t, tr.flags);

  SampleArgs sa;
  auto* s = app.add_subcommand("sample", "draw samples from a checkpoint");
  s->add_option("--checkpoint", sa.checkpoint)->required();
  s->add_option("--n", sa.n);
  s->add_option("--seed", sa.seed);
  s->add_option("--record", sa.record, "comma list of t to snapshot; Ttrunc and T are accepted");
  s->add_flag("--baseline", sa.baseline, "checkpoint is a DDPM baseline");
  s->add_option("--out", sa.out, "output directory")->required();
  s->add_option("--noise_scale", sa.noise_scale, "posterior | beta_sqrt | beta_literal");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval-kl", "grid forward KL between two point CSVs");
  e->add_option("--data", ev.data)->required();
  e->add_option("--samples", ev.samples)->required();
  e->add_option("--out", ev.out, "CSV to append the result row to");
  e->add_option("--dataset", ev.labels.dataset);
  e->add_option("--method", ev.labels.method);
  e->add_option("--T", ev.labels.T);
  e->add_option("--T_trunc", ev.labels.T_trunc);
  e->add_option("--seed", ev.labels.seed);

  ReproduceArgs rp;
  auto* r = app.add_subcommand("reproduce-toy", "TDPM against the DDPM baseline over several seeds");
  r->add_option("--config", rp.config, "base config file");
  r->add_option("--dataset", rp.dataset);
  r->add_option("--T", rp.T, "comma list of chain lengths");
  r->add_option("--T_trunc", rp.T_trunc, "comma list of truncation points, one per T");
  r->add_option("--mode", rp.mode, "gan | ct");
  r->add_option("--seeds", rp.seeds, "number of seeds");
  r->add_option("--epochs", rp.epochs);
  r->add_option("--n", rp.n, "samples per model");
  r->add_option("--threads", rp.threads, "worker threads; 0 reads TDPM_THREADS");
  r->add_option("--out", rp.out, "output directory")->required();
  add_config_flags(*r, rp.flags, {"dataset", "T", "T_trunc", "mode", "epochs"});

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate_data(gen, out);
    if (t->parsed()) return cmd_train(tr, *t, args, out);
    if (s->parsed()) return cmd_sample(sa, args, out);
    if (e->parsed()) return cmd_eval_kl(ev, out);
    if (r->parsed()) return cmd_reproduce_toy(rp, *r, args, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const IoError& ex) {
    err << "I/O error: " << ex.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "I/O error: " << ex.what() << '\n';
    return kExitIo;
  } catch (const NumericError& ex) {
    err << "numeric error: " << ex.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace tdpm
