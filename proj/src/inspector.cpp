#include "itele/inspector.hpp"

namespace itele::inspector {

Inspector::Inspector(uint64_t threshold_bytes, double gc_horizon)
    : threshold_(threshold_bytes), gc_horizon_(gc_horizon) {}

std::optional<ElephantEvent> Inspector::observe_mirrored(const PacketRecord& pkt) {
    auto [it, fresh] = trackers_.try_emplace(pkt.key);
    FlowTracker& t = it->second;
    if (fresh) {
        t.key = pkt.key;
        t.first_seen = pkt.timestamp;
    }
    t.volume += pkt.bytes;
    t.last_seen = pkt.timestamp;
    if (!t.elephant_reported && t.volume >= threshold_) {
        t.elephant_reported = true;
        elephants_ += 1;
        return ElephantEvent{pkt.key, pkt.timestamp, t.volume};
    }
    return std::nullopt;
}

size_t Inspector::gc_trackers(double now) {
    size_t removed = 0;
    for (auto it = trackers_.begin(); it != trackers_.end();) {
        if (now - it->second.last_seen > gc_horizon_) {
            it = trackers_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

void Inspector::reset_tracker(const FlowKey& key) {
    auto it = trackers_.find(key);
    if (it == trackers_.end()) return;
    it->second.volume = 0;
    it->second.elephant_reported = false;
}

const FlowTracker* Inspector::find(const FlowKey& key) const {
    auto it = trackers_.find(key);
    return it == trackers_.end() ? nullptr : &it->second;
}

}  // namespace itele::inspector
