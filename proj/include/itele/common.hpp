#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace itele {

/// Usage / configuration problem. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. CLI maps this to exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// IPv4 addresses are host-order u32 throughout.
std::string format_ipv4(uint32_t ip);
uint32_t parse_ipv4(std::string_view s);  // throws DataError

constexpr uint8_t kProtoTcp = 6;
constexpr uint8_t kProtoUdp = 17;
constexpr uint8_t kProtoOther = 0;  // canonical value for anything that is not TCP/UDP

/// 5-tuple flow identity. Non-TCP/UDP protocols collapse to kProtoOther with
/// zeroed ports, so the key space matches what the flow tables can hold.
struct FlowKey {
    uint32_t src_ip = 0;
    uint32_t dst_ip = 0;
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    uint8_t proto = kProtoOther;

    static FlowKey make(uint32_t src_ip, uint32_t dst_ip, uint16_t src_port,
                        uint16_t dst_port, uint8_t proto) {
        FlowKey k;
        k.src_ip = src_ip;
        k.dst_ip = dst_ip;
        if (proto == kProtoTcp || proto == kProtoUdp) {
            k.proto = proto;
            k.src_port = src_port;
            k.dst_port = dst_port;
        } else {
            k.proto = kProtoOther;
        }
        return k;
    }

    bool is_tcp_or_udp() const { return proto == kProtoTcp || proto == kProtoUdp; }

    /// The same 5-tuple seen from the opposite direction.
    FlowKey reversed() const {
        return make(dst_ip, src_ip, dst_port, src_port, proto);
    }

    auto tie() const { return std::tie(src_ip, dst_ip, src_port, dst_port, proto); }
    bool operator==(const FlowKey& o) const { return tie() == o.tie(); }
    bool operator<(const FlowKey& o) const { return tie() < o.tie(); }

    std::string str() const;
};

enum class Direction : uint8_t {
    provider_to_consumer,
    consumer_to_provider,
};

/// Parsed DNS A-type reply content.
struct DnsReply {
    std::string query_name;           // lowercase, no trailing dot
    std::vector<uint32_t> answer_ips; // non-empty
    double timestamp = 0.0;
};

/// One trace event. dns_payload is only ever set for UDP packets from port 53.
struct PacketRecord {
    double timestamp = 0.0;
    FlowKey key;
    uint64_t bytes = 0;  // >= 1
    Direction direction = Direction::provider_to_consumer;
    std::optional<DnsReply> dns_payload;
};

}  // namespace itele
