#include "itele/pipeline.hpp"

#include <algorithm>

#include <json.hpp>

#include "itele/log.hpp"

namespace itele {

const char* matched_table_name(MatchedTable t) {
    switch (t) {
        case MatchedTable::reactive: return "reactive";
        case MatchedTable::proactive: return "proactive";
        case MatchedTable::fallback: return "default";
    }
    return "?";
}

size_t CounterSnapshot::flow_count() const {
    size_t n = 0;
    for (const auto& c : chunks)
        n += c.size();
    return n;
}

std::vector<FlowCounterSample> CounterSnapshot::all_flows() const {
    std::vector<FlowCounterSample> out;
    out.reserve(flow_count());
    for (const auto& c : chunks)
        out.insert(out.end(), c.begin(), c.end());
    return out;
}

SwitchState::SwitchState(size_t table_capacity) : capacity_(table_capacity) {}

ForwardDecision SwitchState::process_packet(const PacketRecord& pkt) {
    if (pkt.timestamp > clock_)
        clock_ = pkt.timestamp;

    forwarded_bytes_ += pkt.bytes;

    auto it = reactive_.find(pkt.key);
    if (it != reactive_.end()) {
        ReactiveEntry& e = it->second;
        e.byte_count += pkt.bytes;
        e.packet_count += 1;
        e.last_matched = pkt.timestamp;
        auto g = groups_.find(e.group_id);
        g->second.byte_count += pkt.bytes;
        g->second.packet_count += 1;
        table_matches_[0] += 1;
        return {MatchedTable::reactive, false};
    }
    if (pkt.key.is_tcp_or_udp()) {
        mirrored_bytes_ += pkt.bytes;
        mirrored_packets_ += 1;
        table_matches_[1] += 1;
        return {MatchedTable::proactive, true};
    }
    table_matches_[2] += 1;
    return {MatchedTable::fallback, false};
}

InstallStatus SwitchState::install_reactive(const FlowKey& key, uint32_t group_id) {
    if (groups_.find(group_id) == groups_.end())
        throw DataError("install_reactive: unknown group id " + std::to_string(group_id));
    if (reactive_.count(key))
        return InstallStatus::duplicate_entry;
    if (reactive_.size() >= capacity_)
        return InstallStatus::table_full;
    ReactiveEntry e;
    e.key = key;
    e.group_id = group_id;
    e.installed_at = clock_;
    e.last_matched = clock_;
    e.idle_timeout = kIdleTimeoutSeconds;
    reactive_.emplace(key, e);
    installs_ += 1;
    return InstallStatus::ok;
}

uint32_t SwitchState::ensure_group(const std::string& provider) {
    if (provider.empty())
        throw DataError("ensure_group: empty provider name");
    auto it = group_by_provider_.find(provider);
    if (it != group_by_provider_.end())
        return it->second;
    uint32_t id = next_group_id_++;
    GroupEntry g;
    g.group_id = id;
    g.provider = provider;
    groups_.emplace(id, g);
    group_by_provider_.emplace(provider, id);
    return id;
}

std::vector<FlowKey> SwitchState::expire_idle(double now) {
    if (now > clock_)
        clock_ = now;
    std::vector<FlowKey> removed;
    for (auto it = reactive_.begin(); it != reactive_.end();) {
        if (now - it->second.last_matched > it->second.idle_timeout) {
            removed.push_back(it->first);
            it = reactive_.erase(it);
        } else {
            ++it;
        }
    }
    expirations_ += removed.size();
    return removed;  // map iteration order: already key-sorted
}

CounterSnapshot SwitchState::poll_counters() const {
    CounterSnapshot snap;
    snap.taken_at = clock_;
    for (const auto& [key, e] : reactive_) {
        if (snap.chunks.empty() || snap.chunks.back().size() == kPollChunkSize)
            snap.chunks.emplace_back();
        snap.chunks.back().push_back({key, e.byte_count, e.packet_count});
    }
    std::map<std::string, GroupCounterSample> by_provider;
    for (const auto& [id, g] : groups_)
        by_provider[g.provider] = {g.provider, g.byte_count, g.packet_count};
    snap.groups.reserve(by_provider.size());
    for (auto& [name, s] : by_provider)
        snap.groups.push_back(std::move(s));
    return snap;
}

const ReactiveEntry* SwitchState::find(const FlowKey& key) const {
    auto it = reactive_.find(key);
    return it == reactive_.end() ? nullptr : &it->second;
}

uint64_t SwitchState::matches(MatchedTable t) const {
    return table_matches_[static_cast<int>(t)];
}

std::string SwitchState::debug_json() const {
    nlohmann::json j;
    j["clock"] = clock_;
    j["table_capacity"] = capacity_;
    j["entry_count"] = reactive_.size();
    j["mirrored_bytes"] = mirrored_bytes_;
    j["forwarded_bytes"] = forwarded_bytes_;
    j["installs"] = installs_;
    j["expirations"] = expirations_;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, e] : reactive_) {
        entries.push_back({{"key", key.str()},
                           {"group_id", e.group_id},
                           {"byte_count", e.byte_count},
                           {"packet_count", e.packet_count},
                           {"installed_at", e.installed_at},
                           {"last_matched", e.last_matched}});
    }
    j["reactive_table"] = std::move(entries);
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& [id, g] : groups_)
        groups.push_back({{"group_id", id},
                          {"provider", g.provider},
                          {"byte_count", g.byte_count},
                          {"packet_count", g.packet_count}});
    j["group_table"] = std::move(groups);
    return j.dump(2);
}

}  // namespace itele
