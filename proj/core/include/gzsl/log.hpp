#pragma once

#include <string>

namespace gzsl {

enum class LogLevel { error = 0, info = 1, debug = 2 };

// Active level, read once from the GZSL_LOG environment variable
// (error|info|debug, default info).
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace gzsl
