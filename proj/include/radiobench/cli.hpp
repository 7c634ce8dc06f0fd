// Copyright 2026 The RadioBench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RADIOBENCH_CLI_HPP_
#define RADIOBENCH_CLI_HPP_

#include <exception>
#include <ostream>

namespace radiobench::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes. Anything the library reports as a configuration, shape,
// format, corruption or I/O problem is a usage error; numeric and
// estimation failures are numeric errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

int exit_code_for(const std::exception& e);

// Runs one command line (argv[0] is the program name). Results go to
// `out`; errors go to `err` as one JSON object per line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace radiobench::cli

#endif  // RADIOBENCH_CLI_HPP_
