#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "itele/ml/forest.hpp"
#include "itele/replay.hpp"
#include "itele/report.hpp"
#include "itele/traffgen.hpp"

using namespace itele;

namespace {

/// One forest pair trained on synthetic profiles, shared across the cases.
const broker::Models& trained_models() {
    static broker::Models models = [] {
        traffgen::DatasetConfig dc;
        dc.video_flows = 40;
        dc.download_flows = 40;
        dc.seed = 7;
        traffgen::DatasetPair pair = traffgen::generate_datasets(dc);
        ml::ForestParams fp;
        fp.n_trees = 15;
        ml::ForestModel ident = ml::train_forest(pair.identifier, fp, 7);
        ml::ForestModel resol = ml::train_forest(pair.resolution, fp, 7);
        broker::Models m;
        m.loaded = true;
        m.identifier = ident.predictor();
        m.identifier_classes = ident.class_names;
        m.resolution = resol.predictor();
        m.resolution_classes = resol.class_names;
        return m;
    }();
    return models;
}

traffgen::TraceData mixed_trace() {
    traffgen::TraceConfig tc;
    tc.video_flows = 3;  // resolutions low, medium, high
    tc.download_flows = 2;
    tc.mice_flows = 4;
    tc.span = 10;
    tc.duration = 200;
    tc.seed = 5;
    return traffgen::generate_trace(tc);
}

replay::ReplaySummary run_engine(replay::Engine& eng, const traffgen::TraceData& data) {
    trace::VectorSource src(data.packets);
    return eng.run(src);
}

/// Majority verdict over a series; -1 none, 0 nonvideo, 1 video.
int majority_video(const broker::FlowSeries& s) {
    if (s.verdicts.empty()) return -1;
    size_t video = 0;
    for (const auto& v : s.verdicts) video += v.is_video;
    return 2 * video > s.verdicts.size() ? 1 : 0;
}

size_t line_count(const std::string& path) {
    std::ifstream in(path);
    size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        char tmpl[] = "/tmp/itele_test_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("replay classifies a generated mix end to end") {
    traffgen::TraceData data = mixed_trace();
    replay::Engine eng;
    eng.set_models(trained_models());
    replay::ReplaySummary summary = run_engine(eng, data);

    CHECK(summary.packets == data.packets.size());
    CHECK(summary.first_ts == doctest::Approx(data.packets.front().rec.timestamp));
    CHECK(summary.end_of_run > summary.last_ts);

    // every video crosses the volume threshold well inside 200 seconds
    REQUIRE(summary.elephants >= 3);
    CHECK(summary.installs == summary.elephants);
    CHECK(summary.verdicts > 0);

    std::map<std::string, const trace::TruthEntry*> truth;
    for (const auto& t : data.truth) truth[t.flow_id] = &t;

    std::map<std::string, uint64_t> flow_bytes;
    for (const auto& pkt : data.packets)
        if (!pkt.rec.dns_payload) flow_bytes[pkt.flow_id] += pkt.rec.bytes;

    const auto& series = eng.flow_broker().series();
    CHECK(series.size() == summary.elephants);
    uint64_t polled = 0;
    size_t videos_seen = 0;
    for (const auto& s : series) {
        REQUIRE(truth.count(s.flow_id) == 1);
        const trace::TruthEntry& t = *truth[s.flow_id];
        CHECK(t.kind != "mice");  // mice never reach the threshold
        CHECK(s.closed);          // the drain phase closes every series
        polled += s.final_bytes();
        // the final cumulative sample accounts for the flow's whole volume
        CHECK(s.final_bytes() == flow_bytes[s.flow_id]);

        if (t.kind == "video") {
            ++videos_seen;
            CHECK(s.provider == t.provider);
            CHECK(majority_video(s) == 1);
            CHECK(s.stable_resolution == t.resolution);
        } else {
            CHECK(majority_video(s) == 0);
        }
    }
    CHECK(videos_seen == 3);
    CHECK(polled == summary.polled_bytes);
}

TEST_CASE("mice-only traffic never installs reactive entries") {
    traffgen::TraceConfig tc;
    tc.video_flows = 0;
    tc.download_flows = 0;
    tc.mice_flows = 8;
    tc.seed = 3;
    traffgen::TraceData data = traffgen::generate_trace(tc);

    replay::Engine eng;
    eng.set_models(trained_models());
    replay::ReplaySummary summary = run_engine(eng, data);

    CHECK(summary.packets == data.packets.size());
    CHECK(summary.elephants == 0);
    CHECK(summary.installs == 0);
    CHECK(summary.verdicts == 0);
    CHECK(summary.polled_bytes == 0);
    CHECK(summary.max_entry_count == 0);

    // everything stayed on the mirror path
    uint64_t mirrored = 0;
    for (const auto& [sec, bytes] : summary.mirror_load) mirrored += bytes;
    CHECK(mirrored == summary.generated_bytes);
    CHECK(summary.last_mirror_second >= 0);
}

TEST_CASE("replay is deterministic") {
    traffgen::TraceData data = mixed_trace();
    replay::Engine a, b;
    a.set_models(trained_models());
    b.set_models(trained_models());
    replay::ReplaySummary sa = run_engine(a, data);
    replay::ReplaySummary sb = run_engine(b, data);

    CHECK(sa.packets == sb.packets);
    CHECK(sa.generated_bytes == sb.generated_bytes);
    CHECK(sa.polled_bytes == sb.polled_bytes);
    CHECK(sa.installs == sb.installs);
    CHECK(sa.expirations == sb.expirations);
    CHECK(sa.verdicts == sb.verdicts);
    CHECK(sa.insufficient_data == sb.insufficient_data);
    CHECK(sa.end_of_run == sb.end_of_run);
    CHECK(sa.mirror_load == sb.mirror_load);
    CHECK(sa.entry_count == sb.entry_count);
    CHECK(sa.install_times == sb.install_times);

    const auto& xs = a.flow_broker().series();
    const auto& ys = b.flow_broker().series();
    REQUIRE(xs.size() == ys.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        CHECK(xs[i].flow_id == ys[i].flow_id);
        CHECK(xs[i].samples == ys[i].samples);
        REQUIRE(xs[i].verdicts.size() == ys[i].verdicts.size());
        for (size_t j = 0; j < xs[i].verdicts.size(); ++j) {
            CHECK(xs[i].verdicts[j].is_video == ys[i].verdicts[j].is_video);
            CHECK(xs[i].verdicts[j].resolution == ys[i].verdicts[j].resolution);
        }
    }
}

TEST_CASE("report bundle row counts follow the replay") {
    TempDir dir;
    traffgen::TraceData data = mixed_trace();
    replay::Engine eng;
    eng.set_models(trained_models());
    replay::ReplaySummary summary = run_engine(eng, data);

    auto rep = dir.file("rep");
    report::write_replay_report(eng, summary, rep);
    CHECK(line_count(rep + "/flows.tsv") == eng.flow_broker().series().size() + 1);
    CHECK(line_count(rep + "/verdicts.tsv") == summary.verdicts + 1);
    CHECK(line_count(rep + "/entry_count.tsv") == summary.entry_count.size() + 1);
    CHECK(line_count(rep + "/mirror_load.tsv") == summary.mirror_load.size() + 1);
    CHECK(std::filesystem::exists(rep + "/provider_bytes.tsv"));
    CHECK(std::filesystem::exists(rep + "/summary.json"));

    auto an = dir.file("an");
    report::write_analytics(rep, an);
    for (const char* f : {"provider_share.tsv", "resolution_hourly.tsv", "res_change_ccdf.tsv",
                          "duration_ccdf.tsv", "rate_ccdf.tsv"})
        CHECK(std::filesystem::exists(an + "/" + f));

    // the video providers dominate the stream share table
    std::ifstream shares(an + "/provider_share.tsv");
    std::string body((std::istreambuf_iterator<char>(shares)), std::istreambuf_iterator<char>());
    CHECK(body.find("Youtube") != std::string::npos);
}

TEST_CASE("ccdf reports strict exceedance at each distinct value") {
    auto c = report::ccdf({1.0, 1.0, 2.0, 5.0});
    REQUIRE(c.size() == 3);
    CHECK(c[0].first == doctest::Approx(1.0));
    CHECK(c[0].second == doctest::Approx(0.5));
    CHECK(c[1].first == doctest::Approx(2.0));
    CHECK(c[1].second == doctest::Approx(0.25));
    CHECK(c[2].first == doctest::Approx(5.0));
    CHECK(c[2].second == doctest::Approx(0.0));
    CHECK(report::ccdf({}).empty());
}
