#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace nepv::log {

enum class Level { error = 0, info = 1, debug = 2 };

/// Level from NEPV_LOG (error, info, debug); error when unset or unknown.
inline Level level()
{
    static const Level lvl = [] {
        const char* env = std::getenv("NEPV_LOG");
        const std::string_view v = env != nullptr ? env : "";
        if (v == "debug") {
            return Level::debug;
        }
        if (v == "info") {
            return Level::info;
        }
        return Level::error;
    }();
    return lvl;
}

inline void write(Level l, std::string_view msg)
{
    if (static_cast<int>(l) > static_cast<int>(level())) {
        return;
    }
    static constexpr const char* tags[] = {"error", "info", "debug"};
    std::cerr << "[nepv " << tags[static_cast<int>(l)] << "] " << msg << '\n';
}

inline void error(std::string_view m) { write(Level::error, m); }
inline void info(std::string_view m) { write(Level::info, m); }
inline void debug(std::string_view m) { write(Level::debug, m); }

} // namespace nepv::log
