#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "itele/broker.hpp"
#include "itele/inspector.hpp"
#include "itele/pipeline.hpp"
#include "itele/trace.hpp"

namespace itele::replay {

struct ReplayOptions {
    size_t table_capacity{kDefaultTableCapacity};
    uint64_t elephant_threshold{inspector::kElephantThresholdBytes};
    double gc_interval{30};
    /// After the source ends, events keep running until the table and the
    /// tracker store drain, but no longer than this many virtual seconds.
    double drain_limit{200};
    bool debounce_resolution_changes{true};
    bool realtime{false};
};

struct ReplaySummary {
    uint64_t packets{0};
    uint64_t generated_bytes{0};
    /// Sum over all flow series of their final cumulative sample: what the
    /// counters actually measured.
    uint64_t polled_bytes{0};
    uint64_t flows_seen{0};
    uint64_t installs{0};
    uint64_t duplicates{0};
    uint64_t table_full{0};
    uint64_t expirations{0};
    uint64_t elephants{0};
    uint64_t verdicts{0};
    uint64_t insufficient_data{0};
    uint64_t series_closed{0};
    size_t max_entry_count{0};
    double first_ts{0};
    double last_ts{0};
    double end_of_run{0};
    long long last_mirror_second{-1};
    std::vector<std::pair<long long, uint64_t>> mirror_load;  // bytes per whole second
    std::vector<std::pair<double, size_t>> entry_count;       // table size at each poll
    std::vector<double> install_times;
};

/// Virtual-time event loop tying the whole pipeline together. Polls run at
/// whole seconds (first one just after the first packet) with the adaptive
/// interval; tracker GC runs on its own fixed cadence; both fire before any
/// packet stamped at or after their due time, polls first on ties.
class Engine {
  public:
    explicit Engine(ReplayOptions opts = {});

    broker::ProviderMap& providers() { return providers_; }
    void set_models(broker::Models models) { broker_.set_models(std::move(models)); }

    ReplaySummary run(trace::PacketSource& src);

    const broker::Broker& flow_broker() const { return broker_; }
    const SwitchState& switch_state() const { return sw_; }
    const inspector::Inspector& flow_inspector() const { return insp_; }
    const std::map<FlowKey, std::string>& flow_ids() const { return flow_ids_; }

  private:
    ReplayOptions opts_;
    SwitchState sw_;
    inspector::Inspector insp_;
    broker::ProviderMap providers_;
    broker::Broker broker_;
    std::map<FlowKey, std::string> flow_ids_;

    void handle_packet(const trace::TracePacket& pkt, ReplaySummary& summary,
                       std::map<long long, uint64_t>& mirror);
    void run_poll(double t, ReplaySummary& summary);
};

}  // namespace itele::replay
