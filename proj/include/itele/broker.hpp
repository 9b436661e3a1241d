#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "itele/common.hpp"
#include "itele/features.hpp"
#include "itele/inspector.hpp"
#include "itele/ml/dataset.hpp"
#include "itele/pipeline.hpp"

namespace itele::broker {

inline constexpr const char* kUnknownProvider = "Unknown";
inline constexpr double kVerdictPeriod = 16.0;
inline constexpr double kMaxClassifyWindow = 64.0;

/// Adaptive polling cadence: every second below 2500 reactive entries, every
/// 4 seconds from 10000 up, linear in between rounded up to whole seconds.
double polling_interval(size_t n_entries);

/// DNS-derived suffix->provider knowledge plus the time-ordered resolution
/// history used to attribute server IPs.
class ProviderMap {
  public:
    ProviderMap() = default;
    static ProviderMap with_default_suffixes();

    void add_suffix(const std::string& suffix, const std::string& provider);
    /// Lines of `suffix<TAB>provider`; '#' comments allowed.
    void load_suffixes(const std::string& path);

    void add_reply(const DnsReply& reply);

    /// Provider of the most recent record at or before `at` whose answers
    /// contained ip; kUnknownProvider when there is none.
    std::string lookup(uint32_t ip, double at) const;

    /// Longest matching configured suffix wins; names under no configured
    /// suffix become a dynamic provider named by their registrable domain.
    std::string provider_for_name(const std::string& name) const;

    /// Last two labels of the name ("a.b.example.com" -> "example.com").
    static std::string registrable_domain(const std::string& name);

    size_t suffix_count() const { return suffixes_.size(); }
    size_t history_size() const { return history_size_; }

  private:
    std::vector<std::pair<std::string, std::string>> suffixes_;
    std::map<uint32_t, std::vector<std::pair<double, std::string>>> by_ip_;
    size_t history_size_{0};
};

struct Verdict {
    double t{0};
    bool is_video{false};
    std::string resolution;  // empty iff !is_video
};

/// Per-elephant sample series plus its verdict history. Samples are
/// cumulative bytes including the volume mirrored before installation, so
/// differencing them reconstructs the flow's full profile.
struct FlowSeries {
    FlowKey key;
    std::string flow_id;
    std::string provider;
    double first_seen{0};    // first mirrored packet
    double detected_at{0};   // threshold crossing
    double start_time{0};    // verdict anchor: detection rounded up to a whole second
    uint64_t base_volume{0};
    std::vector<std::pair<double, uint64_t>> samples;
    std::vector<Verdict> verdicts;
    int resolution_changes{0};
    bool closed{false};
    double end_time{0};

    double next_due{0};
    std::string stable_resolution;
    std::string pending_resolution;
    int pending_count{0};

    uint64_t final_bytes() const { return samples.empty() ? 0 : samples.back().second; }
    /// Time of the last sample that increased the byte count (approximates
    /// the flow's last activity to within one polling interval).
    double last_activity() const;
};

/// Reconstructs per-second byte bins for the window [end - n_bins, end) from
/// a cumulative sample series, linearly interpolating between samples (a
/// multi-second poll delta spreads evenly across the seconds it covers).
Profile bins_from_samples(const std::vector<std::pair<double, uint64_t>>& samples, double end,
                          size_t n_bins);

struct Models {
    bool loaded{false};
    ml::Predictor identifier;
    std::vector<std::string> identifier_classes;
    ml::Predictor resolution;
    std::vector<std::string> resolution_classes;
};

struct BrokerOptions {
    /// Count a resolution change only after two consecutive identical new
    /// verdicts (suppresses single-tick flapping).
    bool debounce_resolution_changes{true};
};

struct BrokerStats {
    uint64_t installs{0};
    uint64_t duplicates{0};
    uint64_t table_full{0};
    uint64_t series_closed{0};
    uint64_t verdicts{0};
    uint64_t insufficient_data{0};
    uint64_t silent_ticks{0};
};

/// Event-loop core: reacts to elephant events with reactive installs and
/// provider assignment, appends poll snapshots to the series store, and runs
/// the classifiers on each flow's 16-second verdict schedule.
class Broker {
  public:
    Broker(SwitchState& sw, ProviderMap& providers, BrokerOptions opts = {});

    void set_models(Models models) { models_ = std::move(models); }
    bool has_models() const { return models_.loaded; }

    /// Looks up the provider, ensures its group, installs the reactive entry
    /// and opens a sample series. On table_full the flow stays mirrored.
    InstallStatus on_elephant(const inspector::ElephantEvent& ev, double first_seen,
                              const std::string& flow_id);

    /// Polls all counters into the open series (and per-provider series),
    /// then expires idle entries, closing their series.
    void poll_tick(double now);

    /// Issues verdicts for every open series whose next 16-second due time
    /// has been reached. Windows cover min(age, 64) seconds ending at the
    /// due time. No-op without models.
    void classify_pass(double now);

    double next_poll_interval() const { return polling_interval(sw_.entry_count()); }

    const std::vector<FlowSeries>& series() const { return series_; }
    size_t open_series_count() const { return open_.size(); }
    const FlowSeries* find_open(const FlowKey& key) const;
    const std::map<std::string, std::vector<std::pair<double, uint64_t>>>& provider_series()
        const {
        return provider_series_;
    }
    const BrokerStats& stats() const { return stats_; }

    /// Sum over all series of their final cumulative sample: the volume the
    /// telemetry actually measured.
    uint64_t polled_bytes_total() const;

  private:
    SwitchState& sw_;
    ProviderMap& providers_;
    BrokerOptions opts_;
    Models models_;
    std::vector<FlowSeries> series_;
    std::map<FlowKey, size_t> open_;
    std::map<std::string, std::vector<std::pair<double, uint64_t>>> provider_series_;
    BrokerStats stats_;

    void classify_one(FlowSeries& s, double now);
    void note_resolution(FlowSeries& s, const Verdict& v);
};

}  // namespace itele::broker
