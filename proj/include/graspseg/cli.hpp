#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graspseg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Command-line entry point. `args` excludes the program name. Subcommands:
/// synth, fgseg, selfdata, augment, annotate, baseline, eval-miou, eval-ap,
/// overlay. Returns 0 on success, 2 on usage errors and 1 when processing
/// fails.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graspseg
