#include "gzsl/log.hpp"

#include <cstdlib>
#include <iostream>

namespace gzsl {

static LogLevel parse_level() {
    const char* env = std::getenv("GZSL_LOG");
    if (env == nullptr) return LogLevel::info;
    std::string v(env);
    if (v == "error") return LogLevel::error;
    if (v == "debug") return LogLevel::debug;
    return LogLevel::info;
}

LogLevel log_level() {
    static const LogLevel level = parse_level();
    return level;
}

static void emit(const char* tag, const std::string& msg) {
    std::cerr << "[" << tag << "] " << msg << "\n";
}

void log_error(const std::string& msg) {
    emit("error", msg);
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) emit("info", msg);
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) emit("debug", msg);
}

} // namespace gzsl
