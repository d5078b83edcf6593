// src/config.cc

// Copyright 2026  The DPLDA Backend Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dplda/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dplda/errors.h"

namespace dplda {

namespace {

// Sections appear in this order when echoed.
const std::vector<std::pair<std::string, std::string>> &Defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"run.seed", "0"},
      {"synth.preset", "mismatch-5"},
      {"synth.dim", "50"},
      {"synth.speakers", "600"},
      {"synth.sessions_per_speaker", "3"},
      {"synth.segments_per_session", "2"},
      {"synth.dev_fraction", "0.15"},
      {"synth.eval_fraction", "0.25"},
      {"cnet.hidden_dim", "100"},
      {"cnet.bottleneck_dim", "10"},
      {"cnet.epochs", "20"},
      {"cnet.batch_size", "64"},
      {"cnet.learning_rate", "0.001"},
      {"cnet.bn_momentum", "0.9"},
      {"cnet.bn_epsilon", "1e-05"},
      {"backend.lda_dim", "20"},
      {"backend.plda_iters", "50"},
      {"backend.prior", "0.5"},
      {"backend.use_gamma", "false"},
      {"backend.mode", "meta_cal"},
      {"backend.calibration_domain", ""},
      {"backend.max_calibration_segments", "2000"},
      {"backend.w_init_std", "0.5"},
      {"train.n_speakers_per_batch", "64"},
      {"train.stage1_steps", "2000"},
      {"train.stage2_steps", "1000"},
      {"train.lr_stage1", "0.0001"},
      {"train.lr_stage2", "0.001"},
      {"train.dev_eval_every", "100"},
      {"train.adam_beta1", "0.9"},
      {"train.adam_beta2", "0.999"},
      {"train.adam_epsilon", "1e-08"},
      {"train.num_seeds", "1"},
      {"paths.train_embeddings", ""},
      {"paths.train_metadata", ""},
      {"paths.dev_embeddings", ""},
      {"paths.dev_metadata", ""},
      {"paths.dev_trials", ""},
      {"paths.eval_embeddings", ""},
      {"paths.eval_metadata", ""},
      {"paths.eval_trials", ""},
      {"paths.cnet", ""},
      {"paths.model", ""},
      {"paths.scores", ""},
  };
  return d;
}

template <typename T>
T ParseNumber(const std::string &key, const std::string &text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("config: '" + key + "' expects a number, got '" + text + "'");
  return value;
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto &[key, value] : Defaults()) {
    order_.push_back(key);
    values_[key] = value;
  }
}

RunConfig RunConfig::FromFile(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config file not found: '" + path + "'");
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ValidationError("config '" + path + "': " + e.message() + " at line " +
                          std::to_string(e.line()));
  }
  RunConfig config;
  for (const auto &[section, body] : tree) {
    if (body.empty())
      throw ValidationError("config '" + path + "': key '" + section +
                            "' outside any section");
    for (const auto &[key, value] : body)
      config.Set(section + "." + key, value.get_value<std::string>());
  }
  return config;
}

void RunConfig::Set(const std::string &key, const std::string &value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  it->second = value;
}

void RunConfig::ApplyOverride(const std::string &assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ValidationError("config override '" + assignment + "' is not section.key=value");
  Set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

const std::string &RunConfig::Get(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("config: unknown key '" + key + "'");
  return it->second;
}

int RunConfig::GetInt(const std::string &key) const {
  return ParseNumber<int>(key, Get(key));
}

std::uint64_t RunConfig::GetUint64(const std::string &key) const {
  return ParseNumber<std::uint64_t>(key, Get(key));
}

double RunConfig::GetDouble(const std::string &key) const {
  return ParseNumber<double>(key, Get(key));
}

bool RunConfig::GetBool(const std::string &key) const {
  const std::string &v = Get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> RunConfig::Keys() const { return order_; }

std::string RunConfig::ToIni() const {
  std::ostringstream os;
  std::string section;
  for (const std::string &key : order_) {
    const std::size_t dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      if (!section.empty()) os << '\n';
      os << '[' << s << "]\n";
      section = s;
    }
    os << key.substr(dot + 1) << " = " << values_.at(key) << '\n';
  }
  return os.str();
}

nlohmann::json RunConfig::ToJson() const {
  nlohmann::json j = nlohmann::json::object();
  for (const std::string &key : order_) {
    const std::size_t dot = key.find('.');
    j[key.substr(0, dot)][key.substr(dot + 1)] = values_.at(key);
  }
  return j;
}

void RunConfig::WriteEffective(const std::string &dir) const {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/effective_config.ini";
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeError("cannot write '" + path + "'");
  os << ToIni();
}

SynthSettings RunConfig::Synth() const {
  SynthSettings s;
  s.preset = Get("synth.preset");
  s.dim = GetInt("synth.dim");
  s.speakers = GetInt("synth.speakers");
  s.sessions_per_speaker = GetInt("synth.sessions_per_speaker");
  s.segments_per_session = GetInt("synth.segments_per_session");
  s.dev_fraction = GetDouble("synth.dev_fraction");
  s.eval_fraction = GetDouble("synth.eval_fraction");
  return s;
}

SynthSpec RunConfig::MakeSynthSpec() const {
  const SynthSettings s = Synth();
  SynthSpec spec;
  if (s.preset == "mismatch-5")
    spec = Mismatch5Spec(s.dim, s.speakers, Seed());
  else if (s.preset == "single")
    spec = SingleDomainSpec(s.dim, s.speakers, Seed());
  else
    throw ValidationError("config: unknown synth.preset '" + s.preset + "'");
  spec.sessions_per_speaker = s.sessions_per_speaker;
  spec.segments_per_session = s.segments_per_session;
  return spec;
}

ConditionNetConfig RunConfig::CnetConfig() const {
  ConditionNetConfig c;
  c.hidden_dim = GetInt("cnet.hidden_dim");
  c.bottleneck_dim = GetInt("cnet.bottleneck_dim");
  c.epochs = GetInt("cnet.epochs");
  c.batch_size = GetInt("cnet.batch_size");
  c.learning_rate = GetDouble("cnet.learning_rate");
  c.bn_momentum = GetDouble("cnet.bn_momentum");
  c.bn_epsilon = GetDouble("cnet.bn_epsilon");
  c.seed = Seed();
  return c;
}

InitConfig RunConfig::Init() const {
  InitConfig c;
  c.lda_dim = GetInt("backend.lda_dim");
  c.plda_iters = GetInt("backend.plda_iters");
  c.prior = GetDouble("backend.prior");
  c.use_gamma = GetBool("backend.use_gamma");
  c.mode = ParseCalibrationMode(Get("backend.mode"));
  c.calibration_domain = Get("backend.calibration_domain");
  c.max_calibration_segments = GetInt("backend.max_calibration_segments");
  c.w_init_std = GetDouble("backend.w_init_std");
  c.seed = Seed();
  return c;
}

TrainConfig RunConfig::Train() const {
  TrainConfig c;
  c.n_speakers_per_batch = GetInt("train.n_speakers_per_batch");
  c.prior = GetDouble("backend.prior");
  c.adam.beta1 = GetDouble("train.adam_beta1");
  c.adam.beta2 = GetDouble("train.adam_beta2");
  c.adam.epsilon = GetDouble("train.adam_epsilon");
  c.stage1_steps = GetInt("train.stage1_steps");
  c.stage2_steps = GetInt("train.stage2_steps");
  c.seed = Seed();
  c.lr_stage1 = GetDouble("train.lr_stage1");
  c.lr_stage2 = GetDouble("train.lr_stage2");
  c.dev_eval_every = GetInt("train.dev_eval_every");
  return c;
}

}  // namespace dplda
