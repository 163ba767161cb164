// Copyright 2026 The kbtext Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KBTEXT_CLI_H_
#define KBTEXT_CLI_H_

#include <ostream>
#include <span>
#include <string>

namespace kbtext {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitMismatch = 4;

// Entry point of the kbtext tool. `args` excludes the program name.
// Subcommands: generate, preprocess, train, eval, sweep. Each accepts
// `--config FILE` with flat key=value lines named like the long flags;
// flags given on the command line win.
int RunCli(std::span<const std::string> args, std::ostream& out,
           std::ostream& err);

}  // namespace kbtext

#endif  // KBTEXT_CLI_H_
