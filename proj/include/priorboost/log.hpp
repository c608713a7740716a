#pragma once

#include <string_view>

namespace priorboost::log {

// Diagnostics go to stderr. The level is read once from PRIORBOOST_LOG
// (trace, debug, info, warn, error, off); default is warn.
void debug(std::string_view message);
void info(std::string_view message);
void warn(std::string_view message);

}  // namespace priorboost::log
