#pragma once

#include <cstdlib>
#include <iostream>
#include <string>

namespace reslat {

// Log level from RESLAT_LOG: quiet | info (default) | debug.
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("RESLAT_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "quiet") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[reslat] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[reslat:debug] " << msg << "\n";
}

}  // namespace reslat
