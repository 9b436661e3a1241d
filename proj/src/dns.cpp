#include "itele/dns.hpp"

#include <cctype>

namespace itele::dns {

namespace {

constexpr uint16_t kTypeA = 1;
constexpr uint16_t kTypeCname = 5;
constexpr uint16_t kClassIn = 1;
constexpr uint16_t kFlagsResponse = 0x8180;  // QR=1 RD=1 RA=1 NOERROR

void put16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put32(std::vector<uint8_t>& out, uint32_t v) {
    put16(out, static_cast<uint16_t>(v >> 16));
    put16(out, static_cast<uint16_t>(v & 0xffff));
}

void put_name(std::vector<uint8_t>& out, const std::string& name) {
    size_t start = 0;
    while (start < name.size()) {
        size_t dot = name.find('.', start);
        size_t len = (dot == std::string::npos ? name.size() : dot) - start;
        if (len == 0 || len > 63)
            throw DataError("dns encode: bad label in " + name);
        out.push_back(static_cast<uint8_t>(len));
        out.insert(out.end(), name.begin() + start, name.begin() + start + len);
        start = (dot == std::string::npos) ? name.size() : dot + 1;
    }
    out.push_back(0);
}

void put_header(std::vector<uint8_t>& out, uint16_t id, uint16_t ancount) {
    put16(out, id);
    put16(out, kFlagsResponse);
    put16(out, 1);        // QDCOUNT
    put16(out, ancount);  // ANCOUNT
    put16(out, 0);        // NSCOUNT
    put16(out, 0);        // ARCOUNT
}

void put_a_record(std::vector<uint8_t>& out, uint16_t name_pointer, uint32_t ip, uint32_t ttl) {
    put16(out, static_cast<uint16_t>(0xC000 | name_pointer));
    put16(out, kTypeA);
    put16(out, kClassIn);
    put32(out, ttl);
    put16(out, 4);
    put32(out, ip);
}

struct Reader {
    const uint8_t* data;
    size_t len;
    size_t pos{0};

    uint8_t u8() {
        if (pos + 1 > len)
            throw MalformedDns("truncated");
        return data[pos++];
    }
    uint16_t u16() {
        if (pos + 2 > len)
            throw MalformedDns("truncated");
        uint16_t v = static_cast<uint16_t>(data[pos] << 8 | data[pos + 1]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        uint32_t hi = u16();
        return hi << 16 | u16();
    }
    void skip(size_t n) {
        if (pos + n > len)
            throw MalformedDns("truncated");
        pos += n;
    }

    // Decompressing name reader. Pointers may only jump backwards, which
    // bounds the walk without a separate loop counter.
    std::string name() {
        std::string out;
        size_t cursor = pos;
        bool jumped = false;
        size_t guard = len + 1;
        while (guard-- > 0) {
            if (cursor >= len)
                throw MalformedDns("name runs past message");
            uint8_t tag = data[cursor];
            if ((tag & 0xC0) == 0xC0) {
                if (cursor + 2 > len)
                    throw MalformedDns("truncated pointer");
                size_t target = static_cast<size_t>(tag & 0x3F) << 8 | data[cursor + 1];
                if (target >= cursor)
                    throw MalformedDns("forward compression pointer");
                if (!jumped) {
                    pos = cursor + 2;
                    jumped = true;
                }
                cursor = target;
                continue;
            }
            if ((tag & 0xC0) != 0)
                throw MalformedDns("reserved label type");
            if (tag == 0) {
                if (!jumped)
                    pos = cursor + 1;
                break;
            }
            if (cursor + 1 + tag > len)
                throw MalformedDns("label runs past message");
            if (!out.empty())
                out.push_back('.');
            for (size_t i = 0; i < tag; ++i)
                out.push_back(static_cast<char>(
                    std::tolower(static_cast<unsigned char>(data[cursor + 1 + i]))));
            cursor += 1 + static_cast<size_t>(tag);
        }
        return out;
    }
};

}  // namespace

std::vector<uint8_t> encode_reply(const std::string& name, const std::vector<uint32_t>& ips,
                                  uint16_t id, uint32_t ttl) {
    std::vector<uint8_t> out;
    put_header(out, id, static_cast<uint16_t>(ips.size()));
    put_name(out, name);
    put16(out, kTypeA);
    put16(out, kClassIn);
    for (uint32_t ip : ips)
        put_a_record(out, 12, ip, ttl);  // question name sits at offset 12
    return out;
}

std::vector<uint8_t> encode_cname_reply(const std::string& name, const std::string& target,
                                        const std::vector<uint32_t>& ips, uint16_t id,
                                        uint32_t ttl) {
    std::vector<uint8_t> out;
    put_header(out, id, static_cast<uint16_t>(1 + ips.size()));
    put_name(out, name);
    put16(out, kTypeA);
    put16(out, kClassIn);

    put16(out, 0xC00C);
    put16(out, kTypeCname);
    put16(out, kClassIn);
    put32(out, ttl);
    size_t rdlen_at = out.size();
    put16(out, 0);
    size_t target_at = out.size();
    put_name(out, target);
    uint16_t rdlen = static_cast<uint16_t>(out.size() - target_at);
    out[rdlen_at] = static_cast<uint8_t>(rdlen >> 8);
    out[rdlen_at + 1] = static_cast<uint8_t>(rdlen & 0xff);

    for (uint32_t ip : ips)
        put_a_record(out, static_cast<uint16_t>(target_at), ip, ttl);
    return out;
}

DnsReply parse_reply(const uint8_t* data, size_t len, double timestamp) {
    Reader r{data, len};
    r.u16();  // id
    uint16_t flags = r.u16();
    if ((flags & 0x8000) == 0)
        throw MalformedDns("not a response (QR=0)");
    uint16_t qdcount = r.u16();
    uint16_t ancount = r.u16();
    r.u16();  // NSCOUNT
    r.u16();  // ARCOUNT
    if (qdcount != 1)
        throw MalformedDns("expected one question");

    std::string qname = r.name();
    if (qname.empty())
        throw MalformedDns("empty question name");
    r.u16();  // QTYPE
    r.u16();  // QCLASS

    DnsReply reply;
    reply.query_name = qname;
    reply.timestamp = timestamp;
    for (uint16_t i = 0; i < ancount; ++i) {
        r.name();
        uint16_t type = r.u16();
        uint16_t klass = r.u16();
        r.u32();  // TTL
        uint16_t rdlen = r.u16();
        if (type == kTypeA && klass == kClassIn) {
            if (rdlen != 4)
                throw MalformedDns("A record with RDLENGTH != 4");
            reply.answer_ips.push_back(r.u32());
        } else {
            r.skip(rdlen);
        }
    }
    if (reply.answer_ips.empty())
        throw NoARecords();
    return reply;
}

DnsReply parse_reply(const std::vector<uint8_t>& msg, double timestamp) {
    return parse_reply(msg.data(), msg.size(), timestamp);
}

}  // namespace itele::dns
