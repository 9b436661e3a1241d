#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "itele/features.hpp"
#include "itele/ml/dataset.hpp"
#include "itele/rng.hpp"
#include "itele/trace.hpp"

namespace itele::traffgen {

enum class Resolution { low, medium, high, ultrahigh };
inline constexpr std::array<const char*, 4> kResolutionNames = {"low", "medium", "high",
                                                                "ultrahigh"};
const char* resolution_name(Resolution r);

struct VideoClassParams {
    double nominal_rate;  // steady-state mean bytes/s before the quality factor
    double chunk_duty;    // fraction of each on-off period spent sending
};

/// Streaming shape: an initial buffering burst at a rate multiple, then
/// periodic chunk fetches whose duty cycle rises with resolution (higher
/// resolutions keep the pipe busy longer per period). The per-flow quality
/// factor models encoder variability between titles; duty_spread models
/// player/network variability around the class duty cycle.
struct VideoModel {
    std::array<VideoClassParams, 4> classes{};
    int burst_min{12};
    int burst_max{18};
    double burst_multiplier{2.0};
    int period_min{4};
    int period_max{10};
    double jitter{0.10};
    double factor_min{0.75};
    double factor_max{1.30};
    double duty_spread{0.15};

    static VideoModel defaults();
};

/// Bulk transfer: one log-uniform base rate held for the whole flow with
/// occasional one-second stalls, a per-flow jitter level (multi-connection
/// fetches are noisier than single streams), and a slow multiplicative
/// drift (congestion and pacing move the achievable rate over tens of
/// seconds). Idle time stays near zero throughout; only the rate wanders.
struct DownloadParams {
    double rate_min{40'000};
    double rate_max{3'000'000};
    double stall_prob{0.01};
    double jitter_min{0.05};
    double jitter_max{0.70};
    double drift{0.05};
    double walk_min{0.5};
    double walk_max{2.0};
};

struct MiceParams {
    double bytes_min{10'000};
    double bytes_max{1'000'000};
    int len_min{1};
    int len_max{10};
};

Profile video_bins(const VideoModel& m, Resolution res, size_t duration, Rng& rng);
Profile download_bins(const DownloadParams& p, size_t duration, Rng& rng);
Profile mice_bins(const MiceParams& p, Rng& rng);

struct DatasetConfig {
    size_t video_flows{500};  // round-robin across the four resolutions
    size_t download_flows{500};
    uint64_t seed{1};
    VideoModel video{VideoModel::defaults()};
    DownloadParams download{};
};

struct DatasetPair {
    ml::Dataset identifier;
    ml::Dataset resolution;
};

/// 128-second profiles cut into the eight training windows: one
/// window-annotated instance per window per flow.
DatasetPair generate_datasets(const DatasetConfig& cfg);

struct TraceConfig {
    size_t video_flows{4};
    size_t download_flows{3};
    size_t mice_flows{6};
    double span{30};       // flow starts spread uniformly over [0, span)
    size_t duration{160};  // active seconds per video/download flow
    size_t mtu{1500};
    uint64_t seed{1};
    VideoModel video{VideoModel::defaults()};
    DownloadParams download{};
    MiceParams mice{};
    std::vector<std::string> video_suffixes{"googlevideo.com", "nflxvideo.net", "ttvnw.net"};
};

struct TraceData {
    std::vector<trace::TracePacket> packets;  // time-sorted
    std::vector<trace::TruthEntry> truth;
};

/// Packet-level mixed workload. Video flows are announced by a DNS reply
/// shortly before their first packet; downloads alternate between resolvable
/// names and bare connections; mice never exceed the detection threshold.
TraceData generate_trace(const TraceConfig& cfg);

struct StressConfig {
    size_t pairs{14};
    size_t blocks_per_pair{20};
    size_t flows_per_block{114};  // one new flow per block per second
    double rate_min_mbps{0.8};
    double rate_max_mbps{1.2};
    size_t duration{300};
    uint64_t seed{1};

    size_t total_flows() const { return pairs * blocks_per_pair * flows_per_block; }
};

/// Table-churn workload generated on the fly: every block starts one new
/// flow per second until its port range is exhausted, and every started flow
/// keeps sending its constant per-second volume until the end of the run.
/// Emits one aggregated record per flow per second.
class StressSource : public trace::PacketSource {
  public:
    explicit StressSource(const StressConfig& cfg = {});

    bool next(trace::TracePacket& out) override;

    std::vector<trace::TruthEntry> truth() const;
    uint64_t total_bytes() const;
    size_t total_flows() const { return flows_.size(); }

  private:
    struct Flow {
        FlowKey key;
        uint64_t bytes_per_sec{0};
        double offset{0};     // fixed sub-second emission time
        uint32_t start{0};    // first active second
    };

    StressConfig cfg_;
    std::vector<Flow> flows_;          // indexed block * flows_per_block + slot
    std::vector<uint32_t> by_offset_;  // all flow indices in emission order
    size_t second_{0};
    size_t pos_{0};
};

}  // namespace itele::traffgen
