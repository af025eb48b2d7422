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

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "tdpm/csv.hpp"
#include "tdpm/errors.hpp"
#include "tdpm/trainer.hpp"

namespace tdpm {

static_assert(std::endian::native == std::endian::little, "checkpoint blocks are stored little-endian");

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'T', 'D', 'P', 'M', 'C', 'K', 'P', 'T'};

// Visits every serialized array in a fixed order. The callback receives the
// block name plus the live storage, which the save path only reads.
template <typename F>
void for_each_block(TrainState& s, F&& f) {
  auto params = [&](const std::string& set, ParamSet& p) {
    for (auto& [name, t] : p) f("param/" + set + "/" + name, t.mutable_data());
  };
  auto adam = [&](const std::string& set, const ParamSet& p, AdamState& a) {
    for (std::size_t i = 0; i < p.size(); ++i) f("adam/" + set + "/m/" + p.name(i), std::span<double>(a.m[i]));
    for (std::size_t i = 0; i < p.size(); ++i) f("adam/" + set + "/v/" + p.name(i), std::span<double>(a.v[i]));
  };
  auto ema = [&](const std::string& set, const ParamSet& p, EmaState& e) {
    for (std::size_t i = 0; i < p.size(); ++i) f("ema/" + set + "/" + p.name(i), std::span<double>(e.shadow[i]));
  };
  params("model", s.model.params());
  adam("model", s.model.params(), s.adam_model);
  ema("model", s.model.params(), s.ema_model);
  if (s.generator) {
    params("generator", s.generator->params());
    adam("generator", s.generator->params(), *s.adam_generator);
    ema("generator", s.generator->params(), *s.ema_generator);
  }
  if (s.adversarial()) {
    params("critic", s.critic.params());
    adam("critic", s.critic.params(), s.adam_critic);
  }
  if (s.navigator) {
    params("navigator", s.navigator->params());
    adam("navigator", s.navigator->params(), *s.adam_navigator);
  }
}

json adam_steps(const TrainState& s) {
  json j;
  j["model"] = s.adam_model.step;
  if (s.adam_generator) j["generator"] = s.adam_generator->step;
  if (s.adversarial()) j["critic"] = s.adam_critic.step;
  if (s.adam_navigator) j["navigator"] = s.adam_navigator->step;
  return j;
}

}  // namespace

std::string serialize_checkpoint(const TrainState& state) {
  auto& s = const_cast<TrainState&>(state);
  json header;
  header["version"] = kCheckpointVersion;
  header["config"] = s.config.to_map();
  header["iteration"] = s.iteration;
  header["schedule"] = {{"family", to_string(s.schedule->family())},
                        {"T", s.schedule->T()},
                        {"param_a", format_double(s.schedule->param_a())},
                        {"param_b", format_double(s.schedule->param_b())}};
  header["rng"] = {{"noise", s.noise_rng.state()}};
  header["adam_steps"] = adam_steps(s);
  json blocks = json::array();
  std::string payload;
  for_each_block(s, [&](const std::string& name, std::span<double> data) {
    blocks.push_back({{"name", name}, {"size", data.size()}});
    payload.append(reinterpret_cast<const char*>(data.data()), data.size_bytes());
  });
  header["blocks"] = std::move(blocks);
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof len);
  out += text;
  out += payload;
  return out;
}

TrainState deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw VersionError("checkpoint: missing TDPMCKPT magic");
  }
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + sizeof kMagic, sizeof len);
  const std::size_t header_at = sizeof kMagic + sizeof len;
  if (len > bytes.size() - header_at) throw IoError("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(bytes.substr(header_at, len));
  } catch (const json::exception& e) {
    throw VersionError(std::string("checkpoint: unreadable header: ") + e.what());
  }
  if (!header.is_object() || !header.contains("version") || !header["version"].is_number_integer()) {
    throw VersionError("checkpoint: header has no version");
  }
  if (header["version"].get<int>() != kCheckpointVersion) {
    throw VersionError("checkpoint: version " + header["version"].dump() + ", expected " +
                       std::to_string(kCheckpointVersion));
  }
  TrainState s;
  try {
    s = init_state(TrainConfig::from_map(header.at("config").get<std::map<std::string, std::string>>()));
    s.iteration = header.at("iteration").get<std::int64_t>();
    s.noise_rng.restore(header.at("rng").at("noise").get<std::string>());
    const json& steps = header.at("adam_steps");
    s.adam_model.step = steps.at("model").get<std::int64_t>();
    if (s.adam_generator) s.adam_generator->step = steps.at("generator").get<std::int64_t>();
    if (s.adversarial()) s.adam_critic.step = steps.at("critic").get<std::int64_t>();
    if (s.adam_navigator) s.adam_navigator->step = steps.at("navigator").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw VersionError(std::string("checkpoint: malformed header: ") + e.what());
  }
  const json& sched = header.at("schedule");
  if (sched.at("T").get<int>() != s.schedule->T() ||
      sched.at("family").get<std::string>() != to_string(s.schedule->family())) {
    throw VersionError("checkpoint: schedule metadata disagrees with config");
  }

  const json& blocks = header.at("blocks");
  std::size_t at = header_at + len;
  std::size_t k = 0;
  for_each_block(s, [&](const std::string& name, std::span<double> data) {
    if (k >= blocks.size() || blocks[k].at("name").get<std::string>() != name ||
        blocks[k].at("size").get<std::size_t>() != data.size()) {
      throw VersionError("checkpoint: block layout mismatch at '" + name + "'");
    }
    if (bytes.size() - at < data.size_bytes()) throw IoError("checkpoint: truncated at block '" + name + "'");
    std::memcpy(data.data(), bytes.data() + at, data.size_bytes());
    at += data.size_bytes();
    ++k;
  });
  if (k != blocks.size()) throw VersionError("checkpoint: unexpected extra blocks");
  if (at != bytes.size()) throw IoError("checkpoint: trailing bytes after last block");
  return s;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, serialize_checkpoint(state));
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return deserialize_checkpoint(os.str());
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace tdpm
