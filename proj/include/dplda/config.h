// include/dplda/config.h

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

#ifndef DPLDA_CONFIG_H_
#define DPLDA_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "dplda/backend_model.h"
#include "dplda/condition_net.h"
#include "dplda/synth.h"
#include "dplda/trainer.h"

namespace dplda {

struct SynthSettings {
  std::string preset = "mismatch-5";  // or "single"
  int dim = 50;
  int speakers = 600;
  int sessions_per_speaker = 3;
  int segments_per_session = 2;
  double dev_fraction = 0.15;
  double eval_fraction = 0.25;
};

// Flat "section.key" -> value store backed by an INI file. Every key has a
// default; unknown sections or keys are rejected on read and on override.
class RunConfig {
 public:
  RunConfig();

  static RunConfig FromFile(const std::string &path);

  // `key` is "section.key".
  void Set(const std::string &key, const std::string &value);
  // "section.key=value".
  void ApplyOverride(const std::string &assignment);

  const std::string &Get(const std::string &key) const;
  int GetInt(const std::string &key) const;
  std::uint64_t GetUint64(const std::string &key) const;
  double GetDouble(const std::string &key) const;
  bool GetBool(const std::string &key) const;

  std::vector<std::string> Keys() const;

  std::string ToIni() const;
  nlohmann::json ToJson() const;
  // Writes ToIni() to <dir>/effective_config.ini.
  void WriteEffective(const std::string &dir) const;

  std::uint64_t Seed() const { return GetUint64("run.seed"); }
  SynthSettings Synth() const;
  SynthSpec MakeSynthSpec() const;
  ConditionNetConfig CnetConfig() const;
  InitConfig Init() const;
  TrainConfig Train() const;
  int NumSeeds() const { return GetInt("train.num_seeds"); }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> values_;
};

}  // namespace dplda

#endif  // DPLDA_CONFIG_H_
