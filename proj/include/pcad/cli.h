/*
 * Copyright 2026 The pcad Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// `pcad` command line: fit | score | eval | batched | synth.
//
// Exit codes: 0 success, 1 a metric was undefined (reported as null),
// 2 input or validation error. Errors are written to stderr as one JSON
// object {"error": <ErrorCode name>, "message": ...}.

#ifndef PCAD_CLI_H_
#define PCAD_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace pcad {

inline constexpr int kExitOk = 0;
inline constexpr int kExitMetricUndefined = 1;
inline constexpr int kExitInputError = 2;

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace pcad

#endif  // PCAD_CLI_H_
