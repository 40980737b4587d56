#include "mirrortrain/log.hpp"

#include <cstdlib>
#include <cstring>

namespace mirrortrain::log {

static Level resolve_level() {
    const char* env = std::getenv("MIRRORTRAIN_LOG");
    if (env == nullptr) return Level::Error;
    if (std::strcmp(env, "off") == 0) return Level::Off;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Error;
}

Level level() {
    static const Level lvl = resolve_level();
    return lvl;
}

void write(Level lvl, const std::string& msg) {
    if (static_cast<int>(lvl) > static_cast<int>(level())) return;
    const char* prefix = "error";
    if (lvl == Level::Info) prefix = "info";
    if (lvl == Level::Debug) prefix = "debug";
    std::fprintf(stderr, "[mirrortrain:%s] %s\n", prefix, msg.c_str());
}

}  // namespace mirrortrain::log
