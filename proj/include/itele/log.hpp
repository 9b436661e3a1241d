#pragma once

#include <cstdio>

namespace itele::log {

enum Level { error = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity, read from ITELE_LOG on first use
/// (accepts "error"/"warn"/"info"/"debug" or 0..3; default warn).
Level level();

bool enabled(Level lv);

void write(Level lv, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

}  // namespace itele::log

#define ITELE_LOG_AT(lv, ...)                              \
    do {                                                   \
        if (::itele::log::enabled(lv))                     \
            ::itele::log::write(lv, __VA_ARGS__);          \
    } while (0)

#define LOG_ERROR(...) ITELE_LOG_AT(::itele::log::error, __VA_ARGS__)
#define LOG_WARN(...) ITELE_LOG_AT(::itele::log::warn, __VA_ARGS__)
#define LOG_INFO(...) ITELE_LOG_AT(::itele::log::info, __VA_ARGS__)
#define LOG_DEBUG(...) ITELE_LOG_AT(::itele::log::debug, __VA_ARGS__)
