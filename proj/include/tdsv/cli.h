// tdsv/cli.h

// Copyright 2026  The tdsv-backend Authors

// See ../COPYING for clarification regarding multiple authors
//
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

#ifndef TDSV_CLI_H_
#define TDSV_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace tdsv {

/// Runs the `tdsv` command line; args[0] is the program name.  Returns 0 on
/// success, 1 on usage errors, 2 on data/format errors and 3 on
/// numeric/degenerate errors.
int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err);

}  // namespace tdsv

#endif  // TDSV_CLI_H_
