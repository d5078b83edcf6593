// include/dplda/errors.h

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

#ifndef DPLDA_ERRORS_H_
#define DPLDA_ERRORS_H_

#include <functional>
#include <stdexcept>
#include <string>

namespace dplda {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, violated preconditions, inconsistent
// dimensions. The CLI maps this to exit status 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown or I/O failure at run time. Exit status 3.
class RuntimeError : public Error {
 public:
  using Error::Error;
};

// Warnings go through a replaceable sink so tests can count them.
using WarningSink = std::function<void(const std::string &)>;

void Warn(const std::string &message);

// Installs `sink` and returns the previous one. A null sink restores the
// default (stderr).
WarningSink SetWarningSink(WarningSink sink);

}  // namespace dplda

#endif  // DPLDA_ERRORS_H_
