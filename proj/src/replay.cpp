#include "itele/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "itele/dns.hpp"
#include "itele/log.hpp"

namespace itele::replay {

Engine::Engine(ReplayOptions opts)
    : opts_(opts),
      sw_(opts.table_capacity),
      insp_(opts.elephant_threshold),
      providers_(broker::ProviderMap::with_default_suffixes()),
      broker_(sw_, providers_, broker::BrokerOptions{opts.debounce_resolution_changes}) {}

void Engine::handle_packet(const trace::TracePacket& pkt, ReplaySummary& summary,
                           std::map<long long, uint64_t>& mirror) {
    summary.packets += 1;
    summary.generated_bytes += pkt.rec.bytes;
    flow_ids_.try_emplace(pkt.rec.key, pkt.flow_id);

    ForwardDecision decision = sw_.process_packet(pkt.rec);
    if (!decision.mirrored) return;

    mirror[(long long)std::floor(pkt.rec.timestamp)] += pkt.rec.bytes;

    // DNS replies ride the mirror stream; run them through the wire codec so
    // replay exercises the same encode/parse path as live capture would.
    if (pkt.rec.dns_payload) {
        const DnsReply& d = *pkt.rec.dns_payload;
        std::vector<uint8_t> wire = dns::encode_reply(d.query_name, d.answer_ips);
        providers_.add_reply(dns::parse_reply(wire, pkt.rec.timestamp));
    }

    auto event = insp_.observe_mirrored(pkt.rec);
    if (!event) return;

    const inspector::FlowTracker* tracker = insp_.find(pkt.rec.key);
    double first_seen = tracker ? tracker->first_seen : pkt.rec.timestamp;
    InstallStatus status = broker_.on_elephant(*event, first_seen, pkt.flow_id);
    if (status == InstallStatus::ok) {
        summary.install_times.push_back(event->detected_at);
        summary.max_entry_count = std::max(summary.max_entry_count, sw_.entry_count());
    } else if (status == InstallStatus::table_full) {
        insp_.reset_tracker(pkt.rec.key);
    }
}

void Engine::run_poll(double t, ReplaySummary& summary) {
    broker_.poll_tick(t);
    broker_.classify_pass(t);
    summary.entry_count.emplace_back(t, sw_.entry_count());
}

ReplaySummary Engine::run(trace::PacketSource& src) {
    ReplaySummary summary;
    std::map<long long, uint64_t> mirror;

    trace::TracePacket pkt;
    bool have = src.next(pkt);
    if (!have) return summary;
    summary.first_ts = pkt.rec.timestamp;
    summary.last_ts = pkt.rec.timestamp;

    double next_poll = std::floor(summary.first_ts) + 1.0;
    double next_gc = std::floor(summary.first_ts) + opts_.gc_interval;
    double now = summary.first_ts;

    auto wall_start = std::chrono::steady_clock::now();
    auto pace = [&](double virtual_t) {
        if (!opts_.realtime) return;
        auto target = wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(virtual_t - summary.first_ts));
        std::this_thread::sleep_until(target);
    };

    while (true) {
        double next_event = std::min(next_poll, next_gc);
        while (have && pkt.rec.timestamp < next_event) {
            pace(pkt.rec.timestamp);
            handle_packet(pkt, summary, mirror);
            summary.last_ts = pkt.rec.timestamp;
            now = pkt.rec.timestamp;
            have = src.next(pkt);
        }
        if (!have) {
            bool drained = sw_.entry_count() == 0 && insp_.tracker_count() == 0;
            if (drained || next_event > summary.last_ts + opts_.drain_limit) break;
        }
        pace(next_event);
        if (next_poll <= next_gc) {
            run_poll(next_poll, summary);
            next_poll += broker::polling_interval(sw_.entry_count());
        } else {
            insp_.gc_trackers(next_gc);
            next_gc += opts_.gc_interval;
        }
        now = next_event;
    }

    summary.end_of_run = now;
    summary.flows_seen = flow_ids_.size();
    summary.installs = broker_.stats().installs;
    summary.duplicates = broker_.stats().duplicates;
    summary.table_full = broker_.stats().table_full;
    summary.expirations = sw_.lifetime_expirations();
    summary.elephants = insp_.elephants_reported();
    summary.verdicts = broker_.stats().verdicts;
    summary.insufficient_data = broker_.stats().insufficient_data;
    summary.series_closed = broker_.stats().series_closed;
    summary.polled_bytes = broker_.polled_bytes_total();
    summary.mirror_load.assign(mirror.begin(), mirror.end());
    for (const auto& [sec, bytes] : summary.mirror_load)
        if (bytes > 0) summary.last_mirror_second = std::max(summary.last_mirror_second, sec);
    LOG_INFO("replay done: %llu packets, %llu installs, %llu verdicts",
                   (unsigned long long)summary.packets, (unsigned long long)summary.installs,
                   (unsigned long long)summary.verdicts);
    return summary;
}

}  // namespace itele::replay
