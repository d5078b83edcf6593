// include/dplda/model_store.h

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

#ifndef DPLDA_MODEL_STORE_H_
#define DPLDA_MODEL_STORE_H_

#include <string>

#include "json.hpp"

#include "dplda/backend_model.h"
#include "dplda/condition_net.h"

namespace dplda {

// Bundle layout: a magic line, a line holding the byte length of a JSON
// header, the header itself (format version, creation time, config
// snapshot, tensor names and shapes), one newline, then every tensor as
// little-endian float64 in header order (column-major).
constexpr int kBundleFormatVersion = 1;

struct BundleInfo {
  int format_version = kBundleFormatVersion;
  // ISO-8601 UTC. Empty on save means "now", taken from SOURCE_DATE_EPOCH
  // when that variable is set.
  std::string created;
  nlohmann::json config = nlohmann::json::object();
};

std::string BundleTimestamp();

void SaveBackendModel(const BackendModel &model, const std::string &path,
                      const BundleInfo &info = BundleInfo());
BackendModel LoadBackendModel(const std::string &path, BundleInfo *info = nullptr);

void SaveConditionNet(const ConditionNet &net, const std::string &path,
                      const BundleInfo &info = BundleInfo());
ConditionNet LoadConditionNet(const std::string &path, BundleInfo *info = nullptr);

}  // namespace dplda

#endif  // DPLDA_MODEL_STORE_H_
