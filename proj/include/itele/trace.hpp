#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "itele/common.hpp"

namespace itele::trace {

inline constexpr const char* kTraceHeader = "#itrace v1";

/// One trace line: the packet plus its advisory flow id. The pipeline keys
/// on the 5-tuple; flow ids only join against the truth sidecar.
struct TracePacket {
    PacketRecord rec;
    std::string flow_id;
};

/// Per-flow ground truth, written alongside generated traces.
struct TruthEntry {
    std::string flow_id;
    std::string kind;        // video | download | mice | stress
    std::string resolution;  // low | medium | high | ultrahigh | "-"
    std::string provider;
};

class PacketSource {
  public:
    virtual ~PacketSource() = default;
    /// Fills `out` and returns true, or returns false at end of stream.
    virtual bool next(TracePacket& out) = 0;
};

class VectorSource : public PacketSource {
  public:
    explicit VectorSource(const std::vector<TracePacket>& packets) : packets_(packets) {}
    bool next(TracePacket& out) override {
        if (pos_ >= packets_.size())
            return false;
        out = packets_[pos_++];
        return true;
    }

  private:
    const std::vector<TracePacket>& packets_;
    size_t pos_{0};
};

/// Line format:
///   timestamp flow_id src_ip dst_ip src_port dst_port proto bytes [dns:name=ip,ip,...]
/// Timestamps must be non-decreasing.
class TraceWriter {
  public:
    explicit TraceWriter(const std::string& path);
    ~TraceWriter();
    TraceWriter(const TraceWriter&) = delete;
    TraceWriter& operator=(const TraceWriter&) = delete;

    void write(const TracePacket& pkt);
    void close();
    uint64_t packets_written() const { return count_; }

  private:
    std::FILE* out_{nullptr};
    std::string path_;
    uint64_t count_{0};
    double last_ts_{-1e300};
};

class TraceReader : public PacketSource {
  public:
    explicit TraceReader(const std::string& path);
    ~TraceReader();
    TraceReader(const TraceReader&) = delete;
    TraceReader& operator=(const TraceReader&) = delete;

    bool next(TracePacket& out) override;
    uint64_t packets_read() const { return count_; }

  private:
    std::FILE* in_{nullptr};
    std::string path_;
    uint64_t count_{0};
    uint64_t lineno_{1};
    double last_ts_{-1e300};
    std::vector<char> buf_;
};

void write_truth(const std::vector<TruthEntry>& truth, const std::string& path);
std::vector<TruthEntry> read_truth(const std::string& path);

}  // namespace itele::trace
