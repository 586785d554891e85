#pragma once

#include <string_view>

namespace panda::log {

// Thin facade so public headers do not pull in the logging backend.
// Verbosity comes from the PANDA_LOG environment variable
// (trace, debug, info, warn, error, off); default is warn.

void debug(std::string_view msg);
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

/// Re-reads PANDA_LOG. Called lazily on first use.
void configure_from_env();

}  // namespace panda::log
