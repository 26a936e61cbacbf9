#pragma once

#include <string>

namespace ssf {

/// Verbosity from the SSF_LOG environment variable, read once per process:
/// "quiet"/"0" = 0, unset/"info"/"1" = 1, "debug"/"2" = 2.
int log_level();

/// Writes to stderr when log_level() admits the message.
void log_info(const std::string& message);
void log_debug(const std::string& message);

} // namespace ssf
