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

#ifndef PROPTK_CLI_H_
#define PROPTK_CLI_H_

#include <string>
#include <vector>

namespace proptk {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitEndpoint = 2,
  kExitPartial = 3,  // unparseable predictions present
};

// Entry point of the `proptk` executable. Never throws; errors are printed
// to stderr and mapped to an ExitCode.
int RunCli(int argc, const char* const* argv);
// Same, with argv[0] supplied.
int RunCli(const std::vector<std::string>& args);

}  // namespace proptk

#endif  // PROPTK_CLI_H_
