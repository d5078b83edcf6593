// src/errors.cc

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

#include "dplda/errors.h"

#include <iostream>
#include <utility>

namespace dplda {

namespace {

WarningSink &CurrentSink() {
  static WarningSink sink;
  return sink;
}

}  // namespace

void Warn(const std::string &message) {
  const WarningSink &sink = CurrentSink();
  if (sink)
    sink(message);
  else
    std::cerr << "WARNING: " << message << '\n';
}

WarningSink SetWarningSink(WarningSink sink) {
  return std::exchange(CurrentSink(), std::move(sink));
}

}  // namespace dplda
