#include "itele/trace.hpp"

#include <charconv>
#include <cinttypes>
#include <cstring>
#include <fstream>
#include <sstream>

namespace itele::trace {

namespace {

void append_u32(std::string& line, uint64_t v) {
    char tmp[24];
    auto [p, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
    line.append(tmp, p);
}

void append_ip(std::string& line, uint32_t ip) {
    append_u32(line, (ip >> 24) & 0xff);
    line.push_back('.');
    append_u32(line, (ip >> 16) & 0xff);
    line.push_back('.');
    append_u32(line, (ip >> 8) & 0xff);
    line.push_back('.');
    append_u32(line, ip & 0xff);
}

struct FieldCursor {
    const char* p;
    const char* end;
    uint64_t lineno;

    void skip_ws() {
        while (p < end && (*p == ' ' || *p == '\t'))
            ++p;
    }

    std::string_view field() {
        skip_ws();
        const char* start = p;
        while (p < end && *p != ' ' && *p != '\t')
            ++p;
        if (p == start)
            throw DataError("trace line " + std::to_string(lineno) + ": missing field");
        return {start, static_cast<size_t>(p - start)};
    }

    bool at_end() {
        skip_ws();
        return p == end;
    }
};

template <typename T>
T parse_int(std::string_view s, uint64_t lineno, const char* what) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError("trace line " + std::to_string(lineno) + ": bad " + what + " '" +
                        std::string(s) + "'");
    return v;
}

double parse_ts(std::string_view s, uint64_t lineno) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v < 0)
        throw DataError("trace line " + std::to_string(lineno) + ": bad timestamp '" +
                        std::string(s) + "'");
    return v;
}

}  // namespace

TraceWriter::TraceWriter(const std::string& path) : path_(path) {
    out_ = std::fopen(path.c_str(), "w");
    if (!out_)
        throw DataError("cannot write trace: " + path);
    std::fputs(kTraceHeader, out_);
    std::fputc('\n', out_);
}

TraceWriter::~TraceWriter() {
    if (out_)
        std::fclose(out_);
}

void TraceWriter::write(const TracePacket& pkt) {
    if (pkt.rec.timestamp < last_ts_)
        throw DataError("trace writer: timestamps must be non-decreasing");
    last_ts_ = pkt.rec.timestamp;

    std::string line;
    line.reserve(96);
    char ts[32];
    std::snprintf(ts, sizeof(ts), "%.6f", pkt.rec.timestamp);
    line += ts;
    line.push_back(' ');
    line += pkt.flow_id;
    line.push_back(' ');
    append_ip(line, pkt.rec.key.src_ip);
    line.push_back(' ');
    append_ip(line, pkt.rec.key.dst_ip);
    line.push_back(' ');
    append_u32(line, pkt.rec.key.src_port);
    line.push_back(' ');
    append_u32(line, pkt.rec.key.dst_port);
    line.push_back(' ');
    append_u32(line, pkt.rec.key.proto);
    line.push_back(' ');
    append_u32(line, pkt.rec.bytes);
    if (pkt.rec.dns_payload) {
        line += " dns:";
        line += pkt.rec.dns_payload->query_name;
        line.push_back('=');
        for (size_t i = 0; i < pkt.rec.dns_payload->answer_ips.size(); ++i) {
            if (i)
                line.push_back(',');
            append_ip(line, pkt.rec.dns_payload->answer_ips[i]);
        }
    }
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), out_) != line.size())
        throw DataError("trace write failed: " + path_);
    ++count_;
}

void TraceWriter::close() {
    if (out_) {
        if (std::fclose(out_) != 0)
            throw DataError("trace close failed: " + path_);
        out_ = nullptr;
    }
}

TraceReader::TraceReader(const std::string& path) : path_(path), buf_(1 << 16) {
    in_ = std::fopen(path.c_str(), "r");
    if (!in_)
        throw DataError("cannot open trace: " + path);
    if (!std::fgets(buf_.data(), static_cast<int>(buf_.size()), in_))
        throw DataError("trace is empty: " + path);
    size_t n = std::strlen(buf_.data());
    while (n > 0 && (buf_[n - 1] == '\n' || buf_[n - 1] == '\r'))
        buf_[--n] = '\0';
    if (std::string_view(buf_.data(), n) != kTraceHeader)
        throw DataError("trace missing version header: " + path);
}

TraceReader::~TraceReader() {
    if (in_)
        std::fclose(in_);
}

bool TraceReader::next(TracePacket& out) {
    for (;;) {
        if (!std::fgets(buf_.data(), static_cast<int>(buf_.size()), in_))
            return false;
        ++lineno_;
        size_t n = std::strlen(buf_.data());
        if (n + 1 == buf_.size() && buf_[n - 1] != '\n')
            throw DataError("trace line " + std::to_string(lineno_) + ": line too long");
        while (n > 0 && (buf_[n - 1] == '\n' || buf_[n - 1] == '\r'))
            buf_[--n] = '\0';
        if (n == 0)
            continue;

        FieldCursor cur{buf_.data(), buf_.data() + n, lineno_};
        double ts = parse_ts(cur.field(), lineno_);
        if (ts < last_ts_)
            throw DataError("trace line " + std::to_string(lineno_) +
                            ": timestamps must be non-decreasing");
        last_ts_ = ts;

        out.flow_id.assign(cur.field());
        uint32_t src = parse_ipv4(cur.field());
        uint32_t dst = parse_ipv4(cur.field());
        auto sport = parse_int<uint16_t>(cur.field(), lineno_, "src port");
        auto dport = parse_int<uint16_t>(cur.field(), lineno_, "dst port");
        auto proto = parse_int<uint16_t>(cur.field(), lineno_, "proto");
        auto bytes = parse_int<uint64_t>(cur.field(), lineno_, "byte count");
        if (bytes < 1)
            throw DataError("trace line " + std::to_string(lineno_) + ": bytes must be >= 1");

        out.rec.timestamp = ts;
        out.rec.key = FlowKey::make(src, dst, sport, dport, static_cast<uint8_t>(proto));
        out.rec.bytes = bytes;
        out.rec.direction = Direction::provider_to_consumer;
        out.rec.dns_payload.reset();

        if (!cur.at_end()) {
            std::string_view extra = cur.field();
            if (extra.substr(0, 4) != "dns:")
                throw DataError("trace line " + std::to_string(lineno_) +
                                ": unexpected trailing field");
            std::string_view body = extra.substr(4);
            size_t eq = body.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw DataError("trace line " + std::to_string(lineno_) + ": bad dns field");
            DnsReply reply;
            reply.query_name = std::string(body.substr(0, eq));
            reply.timestamp = ts;
            std::string_view ips = body.substr(eq + 1);
            while (!ips.empty()) {
                size_t comma = ips.find(',');
                std::string_view one = ips.substr(0, comma);
                reply.answer_ips.push_back(parse_ipv4(one));
                if (comma == std::string_view::npos)
                    break;
                ips.remove_prefix(comma + 1);
            }
            if (reply.answer_ips.empty())
                throw DataError("trace line " + std::to_string(lineno_) + ": dns with no ips");
            if (out.rec.key.proto != kProtoUdp || out.rec.key.src_port != 53)
                throw DataError("trace line " + std::to_string(lineno_) +
                                ": dns payload requires udp src port 53");
            out.rec.dns_payload = std::move(reply);
        }
        if (!cur.at_end())
            throw DataError("trace line " + std::to_string(lineno_) + ": unexpected trailing field");
        ++count_;
        return true;
    }
}

void write_truth(const std::vector<TruthEntry>& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write truth sidecar: " + path);
    out << "flow_id\tkind\tresolution\tprovider\n";
    for (const TruthEntry& t : truth)
        out << t.flow_id << '\t' << t.kind << '\t' << (t.resolution.empty() ? "-" : t.resolution)
            << '\t' << t.provider << '\n';
    if (!out)
        throw DataError("truth write failed: " + path);
}

std::vector<TruthEntry> read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open truth sidecar: " + path);
    std::vector<TruthEntry> out;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream fields(line);
        TruthEntry t;
        if (!(fields >> t.flow_id >> t.kind >> t.resolution >> t.provider))
            throw DataError("bad truth line: " + line);
        if (first && t.flow_id == "flow_id") {
            first = false;
            continue;
        }
        first = false;
        if (t.resolution == "-")
            t.resolution.clear();
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace itele::trace
