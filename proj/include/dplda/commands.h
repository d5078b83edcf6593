// include/dplda/commands.h

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

#ifndef DPLDA_COMMANDS_H_
#define DPLDA_COMMANDS_H_

#include <string>
#include <vector>

namespace dplda {

// Exit statuses of the command-line tool.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Runs the dplda-backend command line; returns the exit status. Errors are
// reported on stderr.
int RunCli(int argc, const char *const *argv);
int RunCli(const std::vector<std::string> &args);

}  // namespace dplda

#endif  // DPLDA_COMMANDS_H_
