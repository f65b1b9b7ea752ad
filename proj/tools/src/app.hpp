// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cascade::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,      ///< bad flags, values or files
  kNumerical = 3,  ///< a computation failed or missed its tolerance
};

/// Runs `cascade-gamma <args...>`. `args` excludes the program name. Reports
/// go to `out` when --out is "-" (the default); diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads a flat key=value file into "--key value" argument pairs. Blank lines
/// and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

}  // namespace cascade::cli
