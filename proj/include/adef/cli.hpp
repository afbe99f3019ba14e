// Copyright 2026 The ADEF Authors. All Rights Reserved.
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
// =============================================================================

#ifndef ADEF_CLI_HPP
#define ADEF_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace adef {

// Parses `args` (program name excluded) and runs one subcommand:
//   run <config> [--out DIR] [--jobs N]
//   grid <config> [--out DIR] [--jobs N]
//   verify <suite> [--seed S]
//   report <slope|speedup> <run_dir>...
// Returns the process exit status.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace adef

#endif  // ADEF_CLI_HPP
