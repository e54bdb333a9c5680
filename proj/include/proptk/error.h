// Copyright 2026 The proptk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROPTK_ERROR_H_
#define PROPTK_ERROR_H_

#include <stdexcept>
#include <string>

namespace proptk {

// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: bad files, unknown ids, dangling
// references. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An operation was called outside its domain (too few labels, empty table).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A statistic whose denominator vanishes (p_e = 1, D_e = 0, ...).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

// Chat-completion endpoint failure that is not worth retrying.
class EndpointError : public Error {
 public:
  using Error::Error;
};

class AuthError : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

// Network hiccup, timeout, 429 or 5xx. Retried by the classifier.
class TransientEndpointError : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

}  // namespace proptk

#endif  // PROPTK_ERROR_H_
