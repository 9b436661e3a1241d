#include "itele/broker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "itele/log.hpp"

namespace itele::broker {

double polling_interval(size_t n_entries) {
    if (n_entries < 2500) return 1.0;
    if (n_entries >= 10000) return 4.0;
    return std::ceil(1.0 + 3.0 * (double(n_entries) - 2500.0) / 7500.0);
}

ProviderMap ProviderMap::with_default_suffixes() {
    ProviderMap m;
    m.add_suffix("googlevideo.com", "Youtube");
    m.add_suffix("nflxvideo.com", "Netflix");
    m.add_suffix("nflxvideo.net", "Netflix");
    m.add_suffix("ttvnw.net", "Twitch");
    m.add_suffix("fbcdn.net", "Facebook");
    return m;
}

namespace {

std::string lowered(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
    return s;
}

}  // namespace

void ProviderMap::add_suffix(const std::string& suffix, const std::string& provider) {
    if (suffix.empty() || provider.empty()) throw ConfigError("empty provider suffix mapping");
    std::string key = lowered(suffix);
    for (auto& [s, p] : suffixes_) {
        if (s == key) {
            p = provider;
            return;
        }
    }
    suffixes_.emplace_back(key, provider);
}

void ProviderMap::load_suffixes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open provider map: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected suffix<TAB>provider");
        add_suffix(line.substr(0, tab), line.substr(tab + 1));
    }
}

std::string ProviderMap::registrable_domain(const std::string& name) {
    auto last = name.rfind('.');
    if (last == std::string::npos) return name;
    auto prev = name.rfind('.', last == 0 ? 0 : last - 1);
    if (prev == std::string::npos) return name;
    return name.substr(prev + 1);
}

std::string ProviderMap::provider_for_name(const std::string& raw) const {
    std::string name = lowered(raw);
    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [suffix, provider] : suffixes_) {
        bool match = name == suffix || (name.size() > suffix.size() &&
                                        name.compare(name.size() - suffix.size(), suffix.size(),
                                                     suffix) == 0 &&
                                        name[name.size() - suffix.size() - 1] == '.');
        if (match && suffix.size() > best_len) {
            best = &provider;
            best_len = suffix.size();
        }
    }
    if (best) return *best;
    return registrable_domain(name);
}

void ProviderMap::add_reply(const DnsReply& reply) {
    std::string provider = provider_for_name(reply.query_name);
    for (uint32_t ip : reply.answer_ips) {
        auto& hist = by_ip_[ip];
        auto pos = std::upper_bound(
            hist.begin(), hist.end(), reply.timestamp,
            [](double t, const std::pair<double, std::string>& e) { return t < e.first; });
        hist.insert(pos, {reply.timestamp, provider});
        ++history_size_;
    }
}

std::string ProviderMap::lookup(uint32_t ip, double at) const {
    auto it = by_ip_.find(ip);
    if (it == by_ip_.end()) return kUnknownProvider;
    const auto& hist = it->second;
    auto pos = std::upper_bound(
        hist.begin(), hist.end(), at,
        [](double t, const std::pair<double, std::string>& e) { return t < e.first; });
    if (pos == hist.begin()) return kUnknownProvider;
    return std::prev(pos)->second;
}

double FlowSeries::last_activity() const {
    for (size_t i = samples.size(); i > 1; --i) {
        if (samples[i - 1].second > samples[i - 2].second) return samples[i - 1].first;
    }
    return samples.empty() ? start_time : samples.front().first;
}

namespace {

/// Piecewise-linear cumulative byte curve through the samples, held flat
/// before the first and after the last.
double cumulative_at(const std::vector<std::pair<double, uint64_t>>& s, double t) {
    if (s.empty()) return 0.0;
    if (t <= s.front().first) return double(s.front().second);
    if (t >= s.back().first) return double(s.back().second);
    auto pos = std::upper_bound(
        s.begin(), s.end(), t,
        [](double v, const std::pair<double, uint64_t>& e) { return v < e.first; });
    const auto& hi = *pos;
    const auto& lo = *std::prev(pos);
    double span = hi.first - lo.first;
    if (span <= 0) return double(hi.second);
    double frac = (t - lo.first) / span;
    return double(lo.second) + frac * (double(hi.second) - double(lo.second));
}

}  // namespace

Profile bins_from_samples(const std::vector<std::pair<double, uint64_t>>& samples, double end,
                          size_t n_bins) {
    Profile bins(n_bins, 0);
    double start = end - double(n_bins);
    double prev = cumulative_at(samples, start);
    for (size_t i = 0; i < n_bins; ++i) {
        double next = cumulative_at(samples, start + double(i) + 1.0);
        long long v = std::llround(next - prev);
        bins[i] = v > 0 ? uint64_t(v) : 0;
        prev = next;
    }
    return bins;
}

Broker::Broker(SwitchState& sw, ProviderMap& providers, BrokerOptions opts)
    : sw_(sw), providers_(providers), opts_(opts) {}

InstallStatus Broker::on_elephant(const inspector::ElephantEvent& ev, double first_seen,
                                  const std::string& flow_id) {
    std::string provider = providers_.lookup(ev.key.src_ip, ev.detected_at);
    if (provider == kUnknownProvider) provider = providers_.lookup(ev.key.dst_ip, ev.detected_at);
    uint32_t group_id = sw_.ensure_group(provider);
    InstallStatus status = sw_.install_reactive(ev.key, group_id);
    switch (status) {
        case InstallStatus::ok: break;
        case InstallStatus::duplicate_entry:
            stats_.duplicates += 1;
            return status;
        case InstallStatus::table_full:
            stats_.table_full += 1;
            LOG_WARN("reactive table full, %s stays mirrored", ev.key.str().c_str());
            return status;
    }
    stats_.installs += 1;

    FlowSeries s;
    s.key = ev.key;
    s.flow_id = flow_id;
    s.provider = provider;
    s.first_seen = first_seen;
    s.detected_at = ev.detected_at;
    s.start_time = std::ceil(ev.detected_at);
    s.base_volume = ev.volume_at_detection;
    s.samples.emplace_back(ev.detected_at, ev.volume_at_detection);
    s.next_due = s.start_time + kVerdictPeriod;
    open_[ev.key] = series_.size();
    series_.push_back(std::move(s));
    LOG_DEBUG("series opened for %s provider=%s at %.3f", ev.key.str().c_str(),
                    provider.c_str(), ev.detected_at);
    return status;
}

void Broker::poll_tick(double now) {
    CounterSnapshot snap = sw_.poll_counters();
    for (const auto& chunk : snap.chunks) {
        for (const auto& fs : chunk) {
            auto it = open_.find(fs.key);
            if (it == open_.end()) continue;
            FlowSeries& s = series_[it->second];
            s.samples.emplace_back(now, s.base_volume + fs.byte_count);
        }
    }
    for (const auto& gs : snap.groups) {
        provider_series_[gs.provider].emplace_back(now, gs.byte_count);
    }
    for (const FlowKey& key : sw_.expire_idle(now)) {
        auto it = open_.find(key);
        if (it == open_.end()) continue;
        FlowSeries& s = series_[it->second];
        s.closed = true;
        s.end_time = s.last_activity();
        open_.erase(it);
        stats_.series_closed += 1;
    }
}

void Broker::classify_pass(double now) {
    if (!models_.loaded) return;
    for (auto& [key, idx] : open_) {
        FlowSeries& s = series_[idx];
        while (s.next_due <= now) {
            if (s.samples.empty() || s.samples.back().first < s.next_due) {
                stats_.insufficient_data += 1;
                break;
            }
            classify_one(s, s.next_due);
            s.next_due += kVerdictPeriod;
        }
    }
}

void Broker::classify_one(FlowSeries& s, double due) {
    double window = std::min(due - s.start_time, kMaxClassifyWindow);
    size_t n_bins = size_t(std::llround(window));
    Profile bins = bins_from_samples(s.samples, due, n_bins);

    // A tick with no traffic in its newest slice is not classified: the flow
    // has gone quiet and is waiting out the idle timeout.
    uint64_t fresh = 0;
    for (size_t i = n_bins - size_t(kVerdictPeriod); i < n_bins; ++i) fresh += bins[i];
    if (fresh == 0) {
        stats_.silent_ticks += 1;
        return;
    }
    AttributeVector attrs = compute_attributes(bins);

    Verdict v;
    v.t = due;
    ml::Prediction id = models_.identifier(attrs);
    v.is_video = models_.identifier_classes[size_t(id.class_index)] == "video";
    if (v.is_video && models_.resolution) {
        ml::Prediction res = models_.resolution(attrs);
        v.resolution = models_.resolution_classes[size_t(res.class_index)];
    }
    note_resolution(s, v);
    s.verdicts.push_back(std::move(v));
    stats_.verdicts += 1;
}

void Broker::note_resolution(FlowSeries& s, const Verdict& v) {
    if (!v.is_video || v.resolution.empty()) {
        s.pending_resolution.clear();
        s.pending_count = 0;
        return;
    }
    if (s.stable_resolution.empty()) {
        s.stable_resolution = v.resolution;
        return;
    }
    if (v.resolution == s.stable_resolution) {
        s.pending_resolution.clear();
        s.pending_count = 0;
        return;
    }
    if (!opts_.debounce_resolution_changes) {
        s.resolution_changes += 1;
        s.stable_resolution = v.resolution;
        return;
    }
    if (v.resolution == s.pending_resolution) {
        if (++s.pending_count >= 2) {
            s.resolution_changes += 1;
            s.stable_resolution = s.pending_resolution;
            s.pending_resolution.clear();
            s.pending_count = 0;
        }
    } else {
        s.pending_resolution = v.resolution;
        s.pending_count = 1;
    }
}

const FlowSeries* Broker::find_open(const FlowKey& key) const {
    auto it = open_.find(key);
    return it == open_.end() ? nullptr : &series_[it->second];
}

uint64_t Broker::polled_bytes_total() const {
    uint64_t total = 0;
    for (const auto& s : series_) total += s.final_bytes();
    return total;
}

}  // namespace itele::broker
