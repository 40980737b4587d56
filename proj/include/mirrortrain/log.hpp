#pragma once

#include <cstdio>
#include <string>

namespace mirrortrain::log {

enum class Level { Off = 0, Error = 1, Info = 2, Debug = 3 };

// Resolved once from MIRRORTRAIN_LOG (off|error|info|debug); default error.
Level level();

void write(Level lvl, const std::string& msg);

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace mirrortrain::log
