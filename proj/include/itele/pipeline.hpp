#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "itele/common.hpp"

namespace itele {

inline constexpr int kPortIn = 1;
inline constexpr int kPortOut = 2;
inline constexpr int kPortMirror = 3;

enum class MatchedTable { reactive, proactive, fallback };

const char* matched_table_name(MatchedTable t);

/// Everything is forwarded on the cross-connect port; a proactive match adds
/// the mirror port. Nothing ever goes to a controller.
struct ForwardDecision {
    MatchedTable matched{MatchedTable::fallback};
    bool mirrored{false};

    std::vector<int> output_ports() const {
        return mirrored ? std::vector<int>{kPortOut, kPortMirror} : std::vector<int>{kPortOut};
    }
};

enum class InstallStatus { ok, duplicate_entry, table_full };

struct ReactiveEntry {
    FlowKey key;
    uint32_t group_id{0};
    uint64_t byte_count{0};
    uint64_t packet_count{0};
    double installed_at{0};
    double last_matched{0};
    double idle_timeout{60.0};
};

struct GroupEntry {
    uint32_t group_id{0};
    std::string provider;
    uint64_t byte_count{0};
    uint64_t packet_count{0};
};

struct FlowCounterSample {
    FlowKey key;
    uint64_t byte_count{0};
    uint64_t packet_count{0};
};

struct GroupCounterSample {
    std::string provider;
    uint64_t byte_count{0};
    uint64_t packet_count{0};
};

/// Consistent point-in-time copy of all counters. Flow samples are chunked
/// into groups of at most 2500 entries, modeling the switch's multi-part
/// statistics replies.
struct CounterSnapshot {
    double taken_at{0};
    std::vector<std::vector<FlowCounterSample>> chunks;
    std::vector<GroupCounterSample> groups;

    size_t flow_count() const;
    std::vector<FlowCounterSample> all_flows() const;
};

inline constexpr size_t kPollChunkSize = 2500;
inline constexpr size_t kDefaultTableCapacity = 100000;
inline constexpr double kIdleTimeoutSeconds = 60.0;

/// Behavioral model of the switch's multi-table pipeline: a reactive
/// exact-match table with idle timeouts, a proactive forward-and-mirror rule
/// for TCP/UDP, a default cross-connect, and per-provider group counters.
/// All enumeration output is in FlowKey order so runs are reproducible.
class SwitchState {
  public:
    explicit SwitchState(size_t table_capacity = kDefaultTableCapacity);

    /// Advances the logical clock to pkt.timestamp (which must not go
    /// backwards) and applies table lookup in priority order.
    ForwardDecision process_packet(const PacketRecord& pkt);

    /// Installs an exact-match entry with zeroed counters at the current
    /// logical time. The group must already exist.
    InstallStatus install_reactive(const FlowKey& key, uint32_t group_id);

    /// Returns the provider's group id, creating the group on first use.
    uint32_t ensure_group(const std::string& provider);

    /// Removes every entry idle strictly longer than its timeout and returns
    /// the removed keys in sorted order. Groups are never removed.
    std::vector<FlowKey> expire_idle(double now);

    CounterSnapshot poll_counters() const;

    size_t entry_count() const { return reactive_.size(); }
    size_t table_capacity() const { return capacity_; }
    size_t group_count() const { return groups_.size(); }
    double clock() const { return clock_; }

    const ReactiveEntry* find(const FlowKey& key) const;
    const std::map<uint32_t, GroupEntry>& groups() const { return groups_; }
    const std::map<FlowKey, ReactiveEntry>& reactive_table() const { return reactive_; }

    uint64_t total_mirrored_bytes() const { return mirrored_bytes_; }
    uint64_t total_mirrored_packets() const { return mirrored_packets_; }
    uint64_t total_forwarded_bytes() const { return forwarded_bytes_; }
    uint64_t lifetime_installs() const { return installs_; }
    uint64_t lifetime_expirations() const { return expirations_; }
    uint64_t matches(MatchedTable t) const;

    std::string debug_json() const;

  private:
    size_t capacity_;
    double clock_{0};
    std::map<FlowKey, ReactiveEntry> reactive_;
    std::map<uint32_t, GroupEntry> groups_;
    std::map<std::string, uint32_t> group_by_provider_;
    uint32_t next_group_id_{1};

    uint64_t mirrored_bytes_{0};
    uint64_t mirrored_packets_{0};
    uint64_t forwarded_bytes_{0};
    uint64_t installs_{0};
    uint64_t expirations_{0};
    uint64_t table_matches_[3] = {0, 0, 0};
};

}  // namespace itele
