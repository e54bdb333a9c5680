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

#ifndef PROPTK_DIAGNOSTICS_H_
#define PROPTK_DIAGNOSTICS_H_

#include <functional>
#include <string>
#include <vector>

namespace proptk {

using WarningSink = std::function<void(const std::string&)>;

// Emits a non-fatal warning. Goes to stderr unless a sink is installed.
void Warn(const std::string& message);

// Replaces the process-wide warning sink; returns the previous one.
// Passing an empty function restores the stderr default.
WarningSink SetWarningSink(WarningSink sink);

// Collects warnings for the lifetime of the object (tests, CLI summaries).
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> warnings_;
  WarningSink previous_;
};

}  // namespace proptk

#endif  // PROPTK_DIAGNOSTICS_H_
