#include "itele/log.hpp"

#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace itele::log {

static Level parse_level(const char* text) {
    if (!text || !*text)
        return Level::warn;
    if (std::strcmp(text, "error") == 0 || std::strcmp(text, "0") == 0)
        return Level::error;
    if (std::strcmp(text, "warn") == 0 || std::strcmp(text, "1") == 0)
        return Level::warn;
    if (std::strcmp(text, "info") == 0 || std::strcmp(text, "2") == 0)
        return Level::info;
    if (std::strcmp(text, "debug") == 0 || std::strcmp(text, "3") == 0)
        return Level::debug;
    return Level::warn;
}

Level level() {
    static Level cached = parse_level(std::getenv("ITELE_LOG"));
    return cached;
}

bool enabled(Level lv) {
    return lv <= level();
}

void write(Level lvl, const char* fmt, ...) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[%s] ", names[static_cast<int>(lvl)]);
    va_list args;
    va_start(args, fmt);
    std::vfprintf(stderr, fmt, args);
    va_end(args);
    std::fputc('\n', stderr);
}

}  // namespace itele::log
