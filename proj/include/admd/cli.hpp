#pragma once

#include <iosfwd>
#include <string>

namespace admd::cli {

/// Entry point behind the `admd` executable. Subcommands: train, evaluate,
/// plot, convert-check. Returns 0 on success, 1 on input/config errors,
/// 2 on numerical failure.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Character label of a demonstration id: "GShape_3" -> "GShape".
std::string character_of(const std::string &id);

} // namespace admd::cli
