#include "itele/traffgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "itele/broker.hpp"

namespace itele::traffgen {

const char* resolution_name(Resolution r) { return kResolutionNames[size_t(r)]; }

VideoModel VideoModel::defaults() {
    VideoModel m;
    m.classes[size_t(Resolution::low)] = {50'000, 0.30};
    m.classes[size_t(Resolution::medium)] = {187'500, 0.45};
    m.classes[size_t(Resolution::high)] = {500'000, 0.60};
    m.classes[size_t(Resolution::ultrahigh)] = {2'000'000, 0.85};
    return m;
}

namespace {

double jittered(double value, double jitter, Rng& rng) {
    return value * (1.0 + jitter * (2.0 * rng.uniform() - 1.0));
}

uint64_t to_bytes(double v) {
    long long r = std::llround(v);
    return r > 0 ? uint64_t(r) : 0;
}

uint32_t make_ip(uint32_t a, uint32_t b, uint32_t c, uint32_t d) {
    return (a << 24) | (b << 16) | (c << 8) | d;
}

}  // namespace

Profile video_bins(const VideoModel& m, Resolution res, size_t duration, Rng& rng) {
    const VideoClassParams& cls = m.classes[size_t(res)];
    double factor = rng.uniform(m.factor_min, m.factor_max);
    double rate = cls.nominal_rate * factor;
    size_t burst = size_t(m.burst_min) + rng.uniform_int(uint64_t(m.burst_max - m.burst_min + 1));
    double duty = std::clamp(cls.chunk_duty + rng.uniform(-m.duty_spread, m.duty_spread),
                             0.05, 0.97);

    Profile bins;
    bins.reserve(duration);
    while (bins.size() < duration && bins.size() < burst)
        bins.push_back(to_bytes(jittered(m.burst_multiplier * rate, m.jitter, rng)));
    while (bins.size() < duration) {
        int period = m.period_min + int(rng.uniform_int(uint64_t(m.period_max - m.period_min + 1)));
        int on = int(std::llround(duty * period));
        on = std::clamp(on, 1, period - 1);
        // ON seconds carry the whole period's volume so the period mean stays
        // at the nominal rate regardless of duty.
        double on_rate = rate * double(period) / double(on);
        for (int t = 0; t < period && bins.size() < duration; ++t)
            bins.push_back(t < on ? to_bytes(jittered(on_rate, m.jitter, rng)) : 0);
    }
    return bins;
}

Profile download_bins(const DownloadParams& p, size_t duration, Rng& rng) {
    double rate = std::exp(rng.uniform(std::log(p.rate_min), std::log(p.rate_max)));
    double jitter = rng.uniform(p.jitter_min, p.jitter_max);
    double walk = 1.0;
    Profile bins(duration, 0);
    for (size_t t = 0; t < duration; ++t) {
        walk = std::clamp(walk * (1.0 + p.drift * (2.0 * rng.uniform() - 1.0)), p.walk_min,
                          p.walk_max);
        if (rng.uniform() < p.stall_prob) continue;
        bins[t] = to_bytes(jittered(rate * walk, jitter, rng));
    }
    return bins;
}

Profile mice_bins(const MiceParams& p, Rng& rng) {
    double total = rng.uniform(p.bytes_min, p.bytes_max);
    size_t len = size_t(p.len_min) + rng.uniform_int(uint64_t(p.len_max - p.len_min + 1));
    Profile bins(len, 0);
    for (size_t t = 0; t < len; ++t) {
        uint64_t b = to_bytes(jittered(total / double(len), 0.2, rng));
        bins[t] = b > 0 ? b : 1;
    }
    return bins;
}

namespace {

/// Counter polls land on whole seconds while flows start mid-second, so an
/// observed per-second profile mixes each true second with its predecessor.
/// Training profiles get the same treatment so they match what the poller
/// reconstructs (a generator-aligned zero second never survives polling).
Profile phase_smear(const Profile& bins, double phase) {
    Profile out(bins.size());
    uint64_t prev = 0;
    for (size_t t = 0; t < bins.size(); ++t) {
        out[t] = to_bytes(phase * double(prev) + (1.0 - phase) * double(bins[t]));
        prev = bins[t];
    }
    return out;
}

}  // namespace

DatasetPair generate_datasets(const DatasetConfig& cfg) {
    DatasetPair out;
    out.identifier.class_names = ml::kIdentifierClasses;
    out.resolution.class_names = ml::kResolutionClasses;

    auto add_windows = [](ml::Dataset& ds, const Profile& bins, int label) {
        std::vector<Profile> subs = split_sub_profiles(bins);
        for (size_t k = 0; k < subs.size(); ++k) {
            ml::Instance inst;
            inst.attrs = compute_attributes(subs[k]);
            inst.label = label;
            ds.instances.push_back(inst);
            ds.windows.push_back(window_label(kSubProfileWindows[k]));
        }
    };

    for (size_t i = 0; i < cfg.video_flows; ++i) {
        Rng rng = Rng::derive(cfg.seed, i);
        auto res = Resolution(i % 4);
        Profile bins = phase_smear(video_bins(cfg.video, res, 128, rng), rng.uniform());
        add_windows(out.identifier, bins, 0);
        add_windows(out.resolution, bins, int(res));
    }
    for (size_t j = 0; j < cfg.download_flows; ++j) {
        Rng rng = Rng::derive(cfg.seed, cfg.video_flows + j);
        Profile bins = phase_smear(download_bins(cfg.download, 128, rng), rng.uniform());
        add_windows(out.identifier, bins, 1);
    }
    return out;
}

namespace {

std::string flow_tag(char prefix, size_t n) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%04zu", prefix, n);
    return buf;
}

/// Splits one second's volume into MTU-sized packets at sorted random
/// sub-second offsets.
void emit_second(std::vector<trace::TracePacket>& sink, const std::string& flow_id,
                 const FlowKey& key, double second_start, uint64_t bytes, size_t mtu, Rng& rng) {
    if (bytes == 0) return;
    size_t n = size_t((bytes + mtu - 1) / mtu);
    std::vector<double> offs(n);
    for (double& o : offs) o = rng.uniform();
    std::sort(offs.begin(), offs.end());
    for (size_t p = 0; p < n; ++p) {
        uint64_t sz = p + 1 < n ? mtu : bytes - uint64_t(mtu) * (n - 1);
        trace::TracePacket pkt;
        pkt.flow_id = flow_id;
        pkt.rec.timestamp = second_start + offs[p];
        pkt.rec.key = key;
        pkt.rec.bytes = sz;
        pkt.rec.direction = Direction::provider_to_consumer;
        sink.push_back(std::move(pkt));
    }
}

void emit_flow(std::vector<trace::TracePacket>& sink, const std::string& flow_id,
               const FlowKey& key, double start, const Profile& bins, size_t mtu, Rng& rng) {
    for (size_t sec = 0; sec < bins.size(); ++sec)
        emit_second(sink, flow_id, key, start + double(sec), bins[sec], mtu, rng);
}

void emit_dns(std::vector<trace::TracePacket>& sink, const std::string& flow_id,
              const std::string& name, uint32_t server_ip, uint32_t client_ip,
              uint16_t client_port, double ts) {
    trace::TracePacket pkt;
    pkt.flow_id = flow_id;
    pkt.rec.timestamp = ts;
    pkt.rec.key = FlowKey::make(make_ip(10, 53, 0, 53), client_ip, 53, client_port, kProtoUdp);
    pkt.rec.bytes = 64 + name.size();
    pkt.rec.direction = Direction::provider_to_consumer;
    pkt.rec.dns_payload = DnsReply{name, {server_ip}, ts};
    sink.push_back(std::move(pkt));
}

}  // namespace

TraceData generate_trace(const TraceConfig& cfg) {
    if (cfg.video_suffixes.empty()) throw ConfigError("trace generation needs video suffixes");
    TraceData out;
    broker::ProviderMap names = broker::ProviderMap::with_default_suffixes();

    for (size_t i = 0; i < cfg.video_flows; ++i) {
        Rng rng = Rng::derive(cfg.seed, i);
        auto res = Resolution(i % 4);
        double start = rng.uniform(0.0, cfg.span);
        Profile bins = video_bins(cfg.video, res, cfg.duration, rng);

        uint32_t server = make_ip(10, 100, uint32_t(i / 200), uint32_t(i % 200) + 1);
        uint32_t client = make_ip(10, 10, uint32_t(i / 200), uint32_t(i % 200) + 1);
        auto cport = uint16_t(40000 + i % 20000);
        FlowKey key = FlowKey::make(server, client, 443, cport, kProtoTcp);
        std::string id = flow_tag('v', i);
        std::string name =
            "v" + std::to_string(i) + "." + cfg.video_suffixes[i % cfg.video_suffixes.size()];

        emit_dns(out.packets, id, name, server, client, cport,
                 std::max(0.0, start - rng.uniform(1.0, 3.0)));
        emit_flow(out.packets, id, key, start, bins, cfg.mtu, rng);
        out.truth.push_back({id, "video", resolution_name(res), names.provider_for_name(name)});
    }

    for (size_t j = 0; j < cfg.download_flows; ++j) {
        Rng rng = Rng::derive(cfg.seed, cfg.video_flows + j);
        double start = rng.uniform(0.0, cfg.span);
        Profile bins = download_bins(cfg.download, cfg.duration, rng);

        uint32_t server = make_ip(10, 101, uint32_t(j / 200), uint32_t(j % 200) + 1);
        uint32_t client = make_ip(10, 11, uint32_t(j / 200), uint32_t(j % 200) + 1);
        auto cport = uint16_t(41000 + j % 20000);
        FlowKey key = FlowKey::make(server, client, 80, cport, kProtoTcp);
        std::string id = flow_tag('d', j);

        std::string provider = broker::kUnknownProvider;
        if (j % 2 == 0) {
            std::string name = "files.host" + std::to_string(j) + ".net";
            emit_dns(out.packets, id, name, server, client, cport,
                     std::max(0.0, start - rng.uniform(1.0, 3.0)));
            provider = names.provider_for_name(name);
        }
        emit_flow(out.packets, id, key, start, bins, cfg.mtu, rng);
        out.truth.push_back({id, "download", "", provider});
    }

    for (size_t k = 0; k < cfg.mice_flows; ++k) {
        Rng rng = Rng::derive(cfg.seed, cfg.video_flows + cfg.download_flows + k);
        double start = rng.uniform(0.0, cfg.span);
        Profile bins = mice_bins(cfg.mice, rng);

        uint32_t server = make_ip(10, 102, uint32_t(k / 200), uint32_t(k % 200) + 1);
        uint32_t client = make_ip(10, 12, uint32_t(k / 200), uint32_t(k % 200) + 1);
        uint8_t proto = k % 2 == 0 ? kProtoTcp : kProtoUdp;
        FlowKey key = FlowKey::make(server, client, 8080, uint16_t(42000 + k % 20000), proto);
        std::string id = flow_tag('m', k);

        emit_flow(out.packets, id, key, start, bins, cfg.mtu, rng);
        out.truth.push_back({id, "mice", "", broker::kUnknownProvider});
    }

    std::stable_sort(out.packets.begin(), out.packets.end(),
                     [](const trace::TracePacket& a, const trace::TracePacket& b) {
                         return a.rec.timestamp < b.rec.timestamp;
                     });
    return out;
}

StressSource::StressSource(const StressConfig& cfg) : cfg_(cfg) {
    size_t blocks = cfg.pairs * cfg.blocks_per_pair;
    flows_.resize(cfg.total_flows());
    double lo = cfg.rate_min_mbps * 1e6 / 8.0;
    double hi = cfg.rate_max_mbps * 1e6 / 8.0;
    for (size_t b = 0; b < blocks; ++b) {
        auto pair = uint32_t(b / cfg.blocks_per_pair);
        for (size_t t = 0; t < cfg.flows_per_block; ++t) {
            size_t g = b * cfg.flows_per_block + t;
            Rng rng = Rng::derive(cfg.seed, g);
            Flow& f = flows_[g];
            f.key = FlowKey::make(make_ip(10, 200, pair, 1), make_ip(10, 201, pair, 1),
                                  uint16_t(20000 + b), uint16_t(30000 + t), kProtoUdp);
            f.bytes_per_sec = to_bytes(rng.uniform(lo, hi));
            f.offset = rng.uniform();
            f.start = uint32_t(t);
        }
    }
    by_offset_.resize(flows_.size());
    for (size_t g = 0; g < flows_.size(); ++g) by_offset_[g] = uint32_t(g);
    std::sort(by_offset_.begin(), by_offset_.end(), [this](uint32_t a, uint32_t b) {
        return flows_[a].offset != flows_[b].offset ? flows_[a].offset < flows_[b].offset : a < b;
    });
}

bool StressSource::next(trace::TracePacket& out) {
    while (second_ < cfg_.duration) {
        while (pos_ < by_offset_.size()) {
            uint32_t g = by_offset_[pos_++];
            const Flow& f = flows_[g];
            if (f.start > second_) continue;
            char buf[16];
            std::snprintf(buf, sizeof buf, "s%06u", g);
            out.flow_id = buf;
            out.rec.timestamp = double(second_) + f.offset;
            out.rec.key = f.key;
            out.rec.bytes = f.bytes_per_sec;
            out.rec.direction = Direction::provider_to_consumer;
            out.rec.dns_payload.reset();
            return true;
        }
        ++second_;
        pos_ = 0;
    }
    return false;
}

std::vector<trace::TruthEntry> StressSource::truth() const {
    std::vector<trace::TruthEntry> out;
    out.reserve(flows_.size());
    for (size_t g = 0; g < flows_.size(); ++g) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "s%06zu", g);
        out.push_back({buf, "stress", "", broker::kUnknownProvider});
    }
    return out;
}

uint64_t StressSource::total_bytes() const {
    uint64_t total = 0;
    for (const Flow& f : flows_)
        if (f.start < cfg_.duration) total += f.bytes_per_sec * uint64_t(cfg_.duration - f.start);
    return total;
}

}  // namespace itele::traffgen
