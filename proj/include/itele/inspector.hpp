#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "itele/common.hpp"

namespace itele::inspector {

inline constexpr uint64_t kElephantThresholdBytes = 4'000'000;
inline constexpr double kTrackerGcSeconds = 120.0;

struct FlowTracker {
    FlowKey key;
    uint64_t volume{0};
    double first_seen{0};
    double last_seen{0};
    bool elephant_reported{false};
};

struct ElephantEvent {
    FlowKey key;
    double detected_at{0};
    uint64_t volume_at_detection{0};
};

/// Watches the mirror stream: accumulates per-flow volume and reports each
/// flow at most once, on the packet that pushes it to the threshold.
class Inspector {
  public:
    explicit Inspector(uint64_t threshold_bytes = kElephantThresholdBytes,
                       double gc_horizon = kTrackerGcSeconds);

    std::optional<ElephantEvent> observe_mirrored(const PacketRecord& pkt);

    /// Drops trackers idle strictly longer than the horizon; returns how
    /// many were removed.
    size_t gc_trackers(double now);

    /// Re-arms a flow whose install failed: volume restarts from zero so the
    /// flow is re-reported after another threshold's worth of mirrored bytes.
    void reset_tracker(const FlowKey& key);

    const FlowTracker* find(const FlowKey& key) const;
    size_t tracker_count() const { return trackers_.size(); }
    uint64_t threshold() const { return threshold_; }
    uint64_t elephants_reported() const { return elephants_; }

    const std::map<FlowKey, FlowTracker>& trackers() const { return trackers_; }

  private:
    uint64_t threshold_;
    double gc_horizon_;
    uint64_t elephants_{0};
    std::map<FlowKey, FlowTracker> trackers_;
};

}  // namespace itele::inspector
