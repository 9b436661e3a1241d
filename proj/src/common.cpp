#include "itele/common.hpp"

#include <charconv>
#include <cstdio>

namespace itele {

std::string format_ipv4(uint32_t ip) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (ip >> 24) & 0xff, (ip >> 16) & 0xff,
                  (ip >> 8) & 0xff, ip & 0xff);
    return buf;
}

uint32_t parse_ipv4(std::string_view text) {
    uint32_t ip = 0;
    const char* p = text.data();
    const char* end = p + text.size();
    for (int octet = 0; octet < 4; ++octet) {
        unsigned value = 0;
        auto [next, ec] = std::from_chars(p, end, value);
        if (ec != std::errc{} || value > 255)
            throw DataError("bad IPv4 address: " + std::string(text));
        ip = (ip << 8) | value;
        p = next;
        if (octet < 3) {
            if (p == end || *p != '.')
                throw DataError("bad IPv4 address: " + std::string(text));
            ++p;
        }
    }
    if (p != end)
        throw DataError("bad IPv4 address: " + std::string(text));
    return ip;
}

std::string FlowKey::str() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s:%u-%s:%u/%u", format_ipv4(src_ip).c_str(), src_port,
                  format_ipv4(dst_ip).c_str(), dst_port, proto);
    return buf;
}

}  // namespace itele
