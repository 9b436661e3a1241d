#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "itele/broker.hpp"
#include "itele/common.hpp"
#include "itele/dns.hpp"
#include "itele/pipeline.hpp"

using namespace itele;
using namespace itele::broker;

namespace {

FlowKey server_flow(uint32_t server_ip, uint32_t client_ip) {
    return FlowKey::make(server_ip, client_ip, 443, 40000, kProtoTcp);
}

PacketRecord pkt(const FlowKey& k, double ts, uint64_t bytes) {
    PacketRecord p;
    p.timestamp = ts;
    p.key = k;
    p.bytes = bytes;
    return p;
}

inspector::ElephantEvent event(const FlowKey& k, double at, uint64_t volume = 4'000'500) {
    return {k, at, volume};
}

// Scripted classifiers: identifier verdicts and resolution indices are
// consumed from queues (last value repeats); every attribute vector seen is
// captured for inspection.
struct ScriptedModels {
    std::shared_ptr<std::deque<int>> id_script{std::make_shared<std::deque<int>>()};
    std::shared_ptr<std::deque<int>> res_script{std::make_shared<std::deque<int>>()};
    std::shared_ptr<std::vector<AttributeVector>> seen{
        std::make_shared<std::vector<AttributeVector>>()};

    Models build() const {
        Models m;
        m.loaded = true;
        m.identifier_classes = ml::kIdentifierClasses;
        m.resolution_classes = ml::kResolutionClasses;
        auto id = id_script;
        auto seen_v = seen;
        m.identifier = [id, seen_v](const AttributeVector& a) {
            seen_v->push_back(a);
            int c = id->empty() ? 0 : id->front();
            if (id->size() > 1) id->pop_front();
            return ml::Prediction{c, {c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0}};
        };
        auto res = res_script;
        m.resolution = [res](const AttributeVector&) {
            int c = res->empty() ? 0 : res->front();
            if (res->size() > 1) res->pop_front();
            return ml::Prediction{c, {}};
        };
        return m;
    }
};

// One simulated second: traffic mid-second, then the poll at the boundary.
void drive_second(SwitchState& sw, Broker& b, const FlowKey& k, double t, uint64_t bytes) {
    if (bytes > 0) sw.process_packet(pkt(k, t - 0.5, bytes));
    b.poll_tick(t);
    b.classify_pass(t);
}

}  // namespace

TEST_CASE("polling interval covers the documented points") {
    CHECK(polling_interval(0) == doctest::Approx(1.0));
    CHECK(polling_interval(1000) == doctest::Approx(1.0));
    CHECK(polling_interval(2499) == doctest::Approx(1.0));
    CHECK(polling_interval(2500) == doctest::Approx(1.0));
    CHECK(polling_interval(4000) == doctest::Approx(2.0));
    CHECK(polling_interval(6250) == doctest::Approx(3.0));
    CHECK(polling_interval(7500) == doctest::Approx(3.0));
    CHECK(polling_interval(9999) == doctest::Approx(4.0));
    CHECK(polling_interval(10000) == doctest::Approx(4.0));
    CHECK(polling_interval(100000) == doctest::Approx(4.0));
}

TEST_CASE("polling interval is monotone, integral, and bounded") {
    double prev = 1.0;
    for (size_t n = 0; n <= 12000; ++n) {
        double v = polling_interval(n);
        CHECK(v >= 1.0);
        CHECK(v <= 4.0);
        CHECK(v >= prev);
        CHECK(v == doctest::Approx(std::floor(v)));
        prev = v;
    }
}

TEST_CASE("suffix map: longest match wins, registrable domain as fallback") {
    ProviderMap m = ProviderMap::with_default_suffixes();
    CHECK(m.provider_for_name("r3.sn-abc.googlevideo.com") == "Youtube");
    CHECK(m.provider_for_name("googlevideo.com") == "Youtube");
    CHECK(m.provider_for_name("ipv4-c1.nflxvideo.net") == "Netflix");
    CHECK(m.provider_for_name("x.nflxvideo.com") == "Netflix");
    CHECK(m.provider_for_name("video-edge.abc.ttvnw.net") == "Twitch");
    CHECK(m.provider_for_name("scontent.fbcdn.net") == "Facebook");
    // Suffixes only match on label boundaries.
    CHECK(m.provider_for_name("notgooglevideo.com") == "notgooglevideo.com");
    // Unmapped names collapse to their registrable domain.
    CHECK(m.provider_for_name("files.host3.net") == "host3.net");
    CHECK(m.provider_for_name("cdn.a.b.example.org") == "example.org");
    CHECK(m.provider_for_name("localhost") == "localhost");
    CHECK(m.provider_for_name("R4.GoogleVideo.COM") == "Youtube");

    m.add_suffix("special.example.com", "Special");
    m.add_suffix("example.com", "Generic");
    CHECK(m.provider_for_name("x.special.example.com") == "Special");
    CHECK(m.provider_for_name("y.example.com") == "Generic");
}

TEST_CASE("suffix files parse with comments and reject junk") {
    namespace fs = std::filesystem;
    fs::path good = fs::temp_directory_path() / "itele_suffixes_good.tsv";
    {
        std::ofstream f(good);
        f << "# provider map\n";
        f << "cachefly.example\tCacheFly  # trailing comment\n";
        f << "\n";
        f << "vod.example\tVod\n";
    }
    ProviderMap m;
    m.load_suffixes(good.string());
    CHECK(m.suffix_count() == 2);
    CHECK(m.provider_for_name("a.cachefly.example") == "CacheFly");
    CHECK(m.provider_for_name("b.vod.example") == "Vod");
    fs::remove(good);

    fs::path bad = fs::temp_directory_path() / "itele_suffixes_bad.tsv";
    {
        std::ofstream f(bad);
        f << "no-tab-in-this-line\n";
    }
    ProviderMap m2;
    CHECK_THROWS_AS(m2.load_suffixes(bad.string()), ConfigError);
    fs::remove(bad);
    CHECK_THROWS_AS(m2.load_suffixes("/nonexistent/provider.map"), ConfigError);
    CHECK_THROWS_AS(m2.add_suffix("", "p"), ConfigError);
}

TEST_CASE("ip history answers with the most recent mapping at or before t") {
    ProviderMap m = ProviderMap::with_default_suffixes();
    DnsReply r1{"a.googlevideo.com", {100}, 10.0};
    DnsReply r2{"b.nflxvideo.net", {100}, 20.0};
    // Inserted out of order on purpose.
    m.add_reply(r2);
    m.add_reply(r1);
    CHECK(m.history_size() == 2);
    CHECK(m.lookup(100, 5.0) == kUnknownProvider);
    CHECK(m.lookup(100, 10.0) == "Youtube");
    CHECK(m.lookup(100, 15.0) == "Youtube");
    CHECK(m.lookup(100, 20.0) == "Netflix");
    CHECK(m.lookup(100, 1e9) == "Netflix");
    CHECK(m.lookup(999, 15.0) == kUnknownProvider);
}

TEST_CASE("dns wire replies feed the provider history end to end") {
    ProviderMap m = ProviderMap::with_default_suffixes();
    auto wire = dns::encode_reply("r9.sn-q4fl.googlevideo.com", {0x0a640001, 0x0a640002});
    m.add_reply(dns::parse_reply(wire, 42.0));
    CHECK(m.lookup(0x0a640001, 50.0) == "Youtube");
    CHECK(m.lookup(0x0a640002, 50.0) == "Youtube");
}

TEST_CASE("bins reconstruct per-second counts from cumulative samples") {
    std::vector<std::pair<double, uint64_t>> samples = {
        {10.0, 1'000'000}, {11.0, 2'000'000}, {12.0, 3'000'000}};
    Profile bins = bins_from_samples(samples, 12.0, 2);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0] == 1'000'000);
    CHECK(bins[1] == 1'000'000);
}

TEST_CASE("a multi-second poll delta spreads evenly") {
    std::vector<std::pair<double, uint64_t>> samples = {{0.0, 0}, {4.0, 4000}};
    Profile bins = bins_from_samples(samples, 4.0, 4);
    REQUIRE(bins.size() == 4);
    for (uint64_t b : bins) CHECK(b == 1000);
}

TEST_CASE("bins extrapolate flat outside the sampled range") {
    std::vector<std::pair<double, uint64_t>> samples = {{5.0, 100}, {6.0, 200}};
    // Window [2, 8): zero before the first sample, zero after the last.
    Profile bins = bins_from_samples(samples, 8.0, 6);
    REQUIRE(bins.size() == 6);
    CHECK(bins == Profile{0, 0, 0, 100, 0, 0});
}

TEST_CASE("elephant install opens a provider-attributed series") {
    SwitchState sw;
    ProviderMap providers = ProviderMap::with_default_suffixes();
    providers.add_reply({"cdn.googlevideo.com", {0x0a000001}, 1.0});
    Broker b(sw, providers);

    FlowKey k = server_flow(0x0a000001, 0x0a0a0001);
    CHECK(b.on_elephant(event(k, 7.25), 2.0, "f1") == InstallStatus::ok);
    CHECK(b.stats().installs == 1);
    CHECK(b.open_series_count() == 1);
    CHECK(sw.entry_count() == 1);
    CHECK(sw.find(k) != nullptr);

    const FlowSeries* s = b.find_open(k);
    REQUIRE(s != nullptr);
    CHECK(s->provider == "Youtube");
    CHECK(s->flow_id == "f1");
    CHECK(s->first_seen == doctest::Approx(2.0));
    CHECK(s->detected_at == doctest::Approx(7.25));
    CHECK(s->start_time == doctest::Approx(8.0));  // detection rounded up
    CHECK(s->base_volume == 4'000'500);
    REQUIRE(s->samples.size() == 1);
    CHECK(s->samples[0].second == 4'000'500);

    // Same key again: the switch rejects it as a duplicate.
    CHECK(b.on_elephant(event(k, 8.0), 2.0, "f1") == InstallStatus::duplicate_entry);
    CHECK(b.stats().duplicates == 1);
    CHECK(b.open_series_count() == 1);
}

TEST_CASE("provider falls back to dst ip, then Unknown") {
    SwitchState sw;
    ProviderMap providers = ProviderMap::with_default_suffixes();
    providers.add_reply({"x.nflxvideo.net", {0x0a000002}, 0.0});
    Broker b(sw, providers);

    // Server address in dst position (consumer-to-provider key).
    FlowKey up = FlowKey::make(0x0a0a0001, 0x0a000002, 40000, 443, kProtoTcp);
    REQUIRE(b.on_elephant(event(up, 3.0), 1.0, "f1") == InstallStatus::ok);
    CHECK(b.find_open(up)->provider == "Netflix");

    FlowKey unmapped = server_flow(0x0b0b0001, 0x0a0a0002);
    REQUIRE(b.on_elephant(event(unmapped, 4.0), 1.0, "f2") == InstallStatus::ok);
    CHECK(b.find_open(unmapped)->provider == kUnknownProvider);
}

TEST_CASE("full table leaves the flow mirrored and counted") {
    SwitchState sw(1);
    ProviderMap providers;
    Broker b(sw, providers);
    REQUIRE(b.on_elephant(event(server_flow(1, 2), 1.0), 0.5, "f1") == InstallStatus::ok);
    CHECK(b.on_elephant(event(server_flow(3, 4), 2.0), 1.5, "f2") == InstallStatus::table_full);
    CHECK(b.stats().table_full == 1);
    CHECK(b.open_series_count() == 1);
    // The refused flow still mirrors.
    CHECK(sw.process_packet(pkt(server_flow(3, 4), 3.0, 100)).mirrored);
}

TEST_CASE("polls append cumulative samples and close idle series") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 10.0, 4'000'000), 9.0, "f1") == InstallStatus::ok);

    for (double t = 11; t <= 15; ++t) drive_second(sw, b, k, t, 2000);
    const FlowSeries* s = b.find_open(k);
    REQUIRE(s != nullptr);
    REQUIRE(s->samples.size() == 6);  // detection + 5 polls
    CHECK(s->samples.back().first == doctest::Approx(15.0));
    CHECK(s->samples.back().second == 4'000'000 + 5 * 2000);
    CHECK(b.polled_bytes_total() == 4'010'000);

    // No traffic for >60s: the poll at 76 expires and closes the series.
    b.poll_tick(76.0);
    CHECK(b.open_series_count() == 0);
    CHECK(b.stats().series_closed == 1);
    REQUIRE(b.series().size() == 1);
    CHECK(b.series()[0].closed);
    CHECK(b.series()[0].end_time == doctest::Approx(15.0));  // last counted activity
    // Final polled volume survives the close.
    CHECK(b.polled_bytes_total() == 4'010'000);
}

TEST_CASE("provider series track group counters at every poll") {
    SwitchState sw;
    ProviderMap providers = ProviderMap::with_default_suffixes();
    providers.add_reply({"a.googlevideo.com", {1}, 0.0});
    Broker b(sw, providers);
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 1.0, 4'000'000), 0.5, "f1") == InstallStatus::ok);
    for (double t = 2; t <= 4; ++t) drive_second(sw, b, k, t, 1000);
    const auto& ps = b.provider_series();
    REQUIRE(ps.count("Youtube") == 1);
    REQUIRE(ps.at("Youtube").size() == 3);
    CHECK(ps.at("Youtube").back().second == 3000);
}

TEST_CASE("verdicts run on the 16-second schedule with capped windows") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    b.set_models(script.build());

    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 3.2), 3.0, "f1") == InstallStatus::ok);
    CHECK(b.find_open(k)->start_time == doctest::Approx(4.0));

    for (double t = 4; t <= 100; ++t) drive_second(sw, b, k, t, 1000);

    const FlowSeries* s = b.find_open(k);
    REQUIRE(s != nullptr);
    // Due times 20, 36, ..., 100: strictly 16 apart starting at start+16.
    REQUIRE(s->verdicts.size() == 6);
    for (size_t i = 0; i < s->verdicts.size(); ++i)
        CHECK(s->verdicts[i].t == doctest::Approx(20.0 + 16.0 * double(i)));

    // Window growth shows up as cv-scale availability: 16s -> cv4 max,
    // 32s -> cv8, 64s (and capped thereafter) -> cv16.
    const auto& seen = *script.seen;
    REQUIRE(seen.size() == 6);
    CHECK_FALSE(seen[0].present[5]);  // cv8 needs 32 seconds
    CHECK_FALSE(seen[0].present[6]);
    CHECK(seen[1].present[5]);
    CHECK_FALSE(seen[1].present[6]);  // cv16 needs 64
    CHECK_FALSE(seen[2].present[6]);  // 48s window
    CHECK(seen[3].present[6]);
    CHECK(seen[5].present[6]);
    for (const auto& a : seen) {
        CHECK(a.mean_rate() == doctest::Approx(1000.0));
        CHECK(a.idle_fraction() == doctest::Approx(0.0));
    }
    CHECK(b.stats().verdicts == 6);
}

TEST_CASE("classification waits for counter data to reach the due time") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);

    // Due at 16 but the freshest sample is the detection one at 0.
    b.classify_pass(16.0);
    CHECK(b.stats().insufficient_data == 1);
    CHECK(b.stats().verdicts == 0);

    for (double t = 1; t <= 16; ++t) sw.process_packet(pkt(k, t - 0.5, 1000));
    b.poll_tick(16.0);
    b.classify_pass(16.0);
    CHECK(b.stats().verdicts == 1);
}

TEST_CASE("quiet ticks are skipped instead of classified") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 3.2), 3.0, "f1") == InstallStatus::ok);

    // Traffic through t=40, then silence while the entry waits out the
    // idle timeout.
    for (double t = 4; t <= 100; ++t) drive_second(sw, b, k, t, t <= 40 ? 1000 : 0);

    const FlowSeries* open = b.find_open(k);
    CHECK(open == nullptr);  // expired at the poll after 100s of run
    REQUIRE(b.series().size() == 1);
    const FlowSeries& s = b.series()[0];
    // Verdicts at 20 and 36 are fully active; 52's newest slice still holds
    // the 36..40 bytes; 68 onward would classify pure silence.
    REQUIRE(s.verdicts.size() == 3);
    CHECK(s.verdicts[0].t == doctest::Approx(20.0));
    CHECK(s.verdicts[1].t == doctest::Approx(36.0));
    CHECK(s.verdicts[2].t == doctest::Approx(52.0));
    CHECK(b.stats().silent_ticks >= 2);
    CHECK(s.closed);
    CHECK(s.end_time == doctest::Approx(40.0));
}

TEST_CASE("resolution changes debounce on two consecutive verdicts") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    // low, high, high, high: one change, landing on high.
    *script.res_script = {0, 2, 2, 2};
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);
    for (double t = 1; t <= 64; ++t) drive_second(sw, b, k, t, 1000);

    const FlowSeries* s = b.find_open(k);
    REQUIRE(s != nullptr);
    REQUIRE(s->verdicts.size() == 4);
    CHECK(s->verdicts[0].resolution == "low");
    CHECK(s->verdicts[1].resolution == "high");
    CHECK(s->resolution_changes == 1);
    CHECK(s->stable_resolution == "high");
}

TEST_CASE("flapping resolutions never count as changes") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    *script.res_script = {0, 2, 0, 2, 0, 2};  // low/high alternating
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);
    for (double t = 1; t <= 96; ++t) drive_second(sw, b, k, t, 1000);
    const FlowSeries* s = b.find_open(k);
    REQUIRE(s->verdicts.size() == 6);
    CHECK(s->resolution_changes == 0);
    CHECK(s->stable_resolution == "low");
}

TEST_CASE("a nonvideo verdict clears the pending resolution") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    ScriptedModels script;
    *script.id_script = {0, 0, 1, 0, 0};   // video, video, nonvideo, video, video
    *script.res_script = {0, 2, 2, 2, 2};  // the nonvideo tick consumes none
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);
    for (double t = 1; t <= 80; ++t) drive_second(sw, b, k, t, 1000);

    const FlowSeries* s = b.find_open(k);
    REQUIRE(s->verdicts.size() == 5);
    CHECK_FALSE(s->verdicts[2].is_video);
    CHECK(s->verdicts[2].resolution.empty());
    // high at t2 was pending; the nonvideo verdict wiped it, so the two
    // highs after it re-debounce and land the change at the last verdict.
    CHECK(s->resolution_changes == 1);
    CHECK(s->stable_resolution == "high");
}

TEST_CASE("debounce can be disabled") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers, {.debounce_resolution_changes = false});
    ScriptedModels script;
    *script.res_script = {0, 2, 0};
    b.set_models(script.build());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);
    for (double t = 1; t <= 48; ++t) drive_second(sw, b, k, t, 1000);
    const FlowSeries* s = b.find_open(k);
    REQUIRE(s->verdicts.size() == 3);
    CHECK(s->resolution_changes == 2);
    CHECK(s->stable_resolution == "low");
}

TEST_CASE("no models means no verdicts, only samples") {
    SwitchState sw;
    ProviderMap providers;
    Broker b(sw, providers);
    CHECK_FALSE(b.has_models());
    FlowKey k = server_flow(1, 2);
    REQUIRE(b.on_elephant(event(k, 0.0), 0.0, "f1") == InstallStatus::ok);
    for (double t = 1; t <= 40; ++t) drive_second(sw, b, k, t, 1000);
    CHECK(b.stats().verdicts == 0);
    CHECK(b.find_open(k)->samples.size() == 41);
}
