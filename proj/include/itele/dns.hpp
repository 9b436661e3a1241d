#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itele/common.hpp"

namespace itele::dns {

struct MalformedDns : DataError {
    explicit MalformedDns(const std::string& what) : DataError("malformed dns: " + what) {}
};

struct NoARecords : DataError {
    NoARecords() : DataError("dns reply carries no A records") {}
};

/// Encodes a minimal response message: one question for `name` (type A,
/// class IN) and one A answer per address, answer names written as
/// compression pointers to the question.
std::vector<uint8_t> encode_reply(const std::string& name, const std::vector<uint32_t>& ips,
                                  uint16_t id = 0x1234, uint32_t ttl = 60);

/// Encodes a response whose answer section is a CNAME from the question name
/// to `target`, followed by one A record per address owned by `target`.
std::vector<uint8_t> encode_cname_reply(const std::string& name, const std::string& target,
                                        const std::vector<uint32_t>& ips, uint16_t id = 0x1234,
                                        uint32_t ttl = 60);

/// Decodes a response message and extracts the question name plus every
/// A-record address in the answer section; other record types are skipped.
/// Throws MalformedDns on undecodable input or non-responses, NoARecords
/// when the answer section holds no A records. The returned name is
/// lowercase without a trailing dot.
DnsReply parse_reply(const uint8_t* data, size_t len, double timestamp = 0.0);
DnsReply parse_reply(const std::vector<uint8_t>& msg, double timestamp = 0.0);

}  // namespace itele::dns
