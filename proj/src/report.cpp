#include "itele/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

namespace itele::report {

namespace {

struct TsvFile {
    explicit TsvFile(const std::string& path) : out(path) {
        if (!out) throw DataError("cannot write " + path);
    }
    template <typename... Args>
    void row(const char* fmt, Args... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        out << buf << '\n';
    }
    void line(const std::string& s) { out << s << '\n'; }
    std::ofstream out;
};

std::string dash_if_empty(const std::string& s) { return s.empty() ? "-" : s; }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    size_t col(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("missing column " + name);
    }
};

Table read_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (t.header.empty())
            t.header = std::move(fields);
        else
            t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw DataError(path + " is empty");
    return t;
}

}  // namespace

std::vector<std::pair<double, double>> ccdf(std::vector<double> values) {
    std::vector<std::pair<double, double>> out;
    if (values.empty()) return out;
    std::sort(values.begin(), values.end());
    double n = double(values.size());
    size_t i = 0;
    while (i < values.size()) {
        size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        out.emplace_back(values[i], double(values.size() - j) / n);
        i = j;
    }
    return out;
}

void write_replay_report(const replay::Engine& eng, const replay::ReplaySummary& summary,
                         const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto& series = eng.flow_broker().series();

    {
        TsvFile f(out_dir + "/verdicts.tsv");
        f.line("flow_id\tt\tclass\tresolution\tprovider");
        for (const auto& s : series) {
            for (const auto& v : s.verdicts) {
                f.row("%s\t%.3f\t%s\t%s\t%s", s.flow_id.c_str(), v.t,
                      v.is_video ? "video" : "nonvideo", dash_if_empty(v.resolution).c_str(),
                      s.provider.c_str());
            }
        }
    }
    {
        TsvFile f(out_dir + "/flows.tsv");
        f.line(
            "flow_id\tkey\tprovider\tfirst_seen\tdetected_at\tstart_time\tend_time\tbytes"
            "\tverdict_count\tvideo_verdicts\tresolution_changes\tfinal_class"
            "\tfinal_resolution\tclosed");
        for (const auto& s : series) {
            size_t video_verdicts = 0;
            for (const auto& v : s.verdicts) video_verdicts += v.is_video ? 1 : 0;
            std::string final_class = "-";
            std::string final_res = "-";
            if (!s.verdicts.empty()) {
                final_class = s.verdicts.back().is_video ? "video" : "nonvideo";
                final_res = dash_if_empty(s.verdicts.back().resolution);
            }
            double end_time = s.closed ? s.end_time : s.last_activity();
            f.row("%s\t%s\t%s\t%.3f\t%.3f\t%.3f\t%.3f\t%llu\t%zu\t%zu\t%d\t%s\t%s\t%d",
                  s.flow_id.c_str(), s.key.str().c_str(), s.provider.c_str(), s.first_seen,
                  s.detected_at, s.start_time, end_time, (unsigned long long)s.final_bytes(),
                  s.verdicts.size(), video_verdicts, s.resolution_changes, final_class.c_str(),
                  final_res.c_str(), s.closed ? 1 : 0);
        }
    }
    {
        TsvFile f(out_dir + "/provider_bytes.tsv");
        f.line("provider\tbytes\tpackets");
        std::map<std::string, const GroupEntry*> by_name;
        for (const auto& [id, g] : eng.switch_state().groups()) by_name[g.provider] = &g;
        for (const auto& [name, g] : by_name)
            f.row("%s\t%llu\t%llu", name.c_str(), (unsigned long long)g->byte_count,
                  (unsigned long long)g->packet_count);
    }
    {
        TsvFile f(out_dir + "/mirror_load.tsv");
        f.line("second\tbytes");
        for (const auto& [sec, bytes] : summary.mirror_load)
            f.row("%lld\t%llu", sec, (unsigned long long)bytes);
    }
    {
        TsvFile f(out_dir + "/entry_count.tsv");
        f.line("t\tentries");
        for (const auto& [t, n] : summary.entry_count) f.row("%.3f\t%zu", t, n);
    }
    {
        nlohmann::json j;
        j["packets"] = summary.packets;
        j["generated_bytes"] = summary.generated_bytes;
        j["polled_bytes"] = summary.polled_bytes;
        j["flows_seen"] = summary.flows_seen;
        j["installs"] = summary.installs;
        j["duplicates"] = summary.duplicates;
        j["table_full"] = summary.table_full;
        j["expirations"] = summary.expirations;
        j["elephants"] = summary.elephants;
        j["verdicts"] = summary.verdicts;
        j["insufficient_data"] = summary.insufficient_data;
        j["series_closed"] = summary.series_closed;
        j["max_entry_count"] = summary.max_entry_count;
        j["first_ts"] = summary.first_ts;
        j["last_ts"] = summary.last_ts;
        j["end_of_run"] = summary.end_of_run;
        j["last_mirror_second"] = summary.last_mirror_second;
        std::ofstream out(out_dir + "/summary.json");
        if (!out) throw DataError("cannot write " + out_dir + "/summary.json");
        out << j.dump(2) << '\n';
    }
}

void write_analytics(const std::string& report_dir, const std::string& out_dir) {
    namespace fs = std::filesystem;
    Table verdicts = read_tsv(report_dir + "/verdicts.tsv");
    Table flows = read_tsv(report_dir + "/flows.tsv");
    if (verdicts.rows.empty()) throw DataError("verdict log has no entries");
    fs::create_directories(out_dir);

    // A flow counts as a stream when most of its verdicts said video; a lone
    // early misfire on an ambiguous first window does not.
    size_t c_video_verdicts = flows.col("video_verdicts");
    size_t c_verdict_count = flows.col("verdict_count");
    auto is_stream = [&](const std::vector<std::string>& r) {
        return 2 * std::stoull(r[c_video_verdicts]) > std::stoull(r[c_verdict_count]);
    };
    {
        size_t c_provider = flows.col("provider");
        std::map<std::string, size_t> streams;
        size_t total = 0;
        for (const auto& r : flows.rows) {
            if (!is_stream(r)) continue;
            streams[r[c_provider]] += 1;
            total += 1;
        }
        std::vector<std::pair<std::string, size_t>> ranked(streams.begin(), streams.end());
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        TsvFile f(out_dir + "/provider_share.tsv");
        f.line("provider\tstreams\tshare");
        for (const auto& [name, n] : ranked)
            f.row("%s\t%zu\t%.4f", name.c_str(), n, total ? double(n) / double(total) : 0.0);
    }
    {
        size_t c_t = verdicts.col("t");
        size_t c_class = verdicts.col("class");
        size_t c_res = verdicts.col("resolution");
        static const char* kRes[] = {"low", "medium", "high", "ultrahigh"};
        std::map<long long, std::array<size_t, 5>> hours;  // 4 resolutions + total
        for (const auto& r : verdicts.rows) {
            if (r[c_class] != "video") continue;
            auto hour = (long long)std::floor(std::stod(r[c_t]) / 3600.0);
            auto& h = hours[hour];
            h[4] += 1;
            for (size_t i = 0; i < 4; ++i)
                if (r[c_res] == kRes[i]) h[i] += 1;
        }
        TsvFile f(out_dir + "/resolution_hourly.tsv");
        f.line("hour\tlow\tmedium\thigh\tultrahigh\tvideo_verdicts");
        for (const auto& [hour, h] : hours) {
            double total = double(h[4]);
            f.row("%lld\t%.4f\t%.4f\t%.4f\t%.4f\t%zu", hour, h[0] / total, h[1] / total,
                  h[2] / total, h[3] / total, h[4]);
        }
    }
    {
        size_t c_changes = flows.col("resolution_changes");
        size_t c_start = flows.col("start_time");
        size_t c_end = flows.col("end_time");
        std::vector<double> changes_per_hour;
        for (const auto& r : flows.rows) {
            if (!is_stream(r)) continue;
            double hours = (std::stod(r[c_end]) - std::stod(r[c_start])) / 3600.0;
            if (hours <= 0) continue;
            changes_per_hour.push_back(std::stod(r[c_changes]) / hours);
        }
        TsvFile f(out_dir + "/res_change_ccdf.tsv");
        f.line("changes_per_hour\tccdf");
        for (const auto& [x, p] : ccdf(std::move(changes_per_hour))) f.row("%.6f\t%.6f", x, p);
    }
    {
        size_t c_first = flows.col("first_seen");
        size_t c_end = flows.col("end_time");
        size_t c_bytes = flows.col("bytes");
        std::vector<double> durations;
        std::vector<double> rates;
        for (const auto& r : flows.rows) {
            double d = std::stod(r[c_end]) - std::stod(r[c_first]);
            if (d <= 0) continue;
            durations.push_back(d);
            rates.push_back(std::stod(r[c_bytes]) / d);
        }
        TsvFile f(out_dir + "/duration_ccdf.tsv");
        f.line("seconds\tccdf");
        for (const auto& [x, p] : ccdf(std::move(durations))) f.row("%.6f\t%.6f", x, p);
        TsvFile g(out_dir + "/rate_ccdf.tsv");
        g.line("bytes_per_sec\tccdf");
        for (const auto& [x, p] : ccdf(std::move(rates))) g.row("%.6f\t%.6f", x, p);
    }
}

}  // namespace itele::report
