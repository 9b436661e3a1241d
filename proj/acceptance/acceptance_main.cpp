// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL]
// line with the measured numbers and the pinned tolerance; the process
// exits nonzero if any criterion fails. Everything is seeded, so the
// numbers are reproducible run to run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "itele/dns.hpp"
#include "itele/features.hpp"
#include "itele/ml/evaluate.hpp"
#include "itele/pipeline.hpp"
#include "itele/replay.hpp"
#include "itele/rng.hpp"
#include "itele/traffgen.hpp"

using namespace itele;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    if (!pass)
        ++g_failures;
}

std::string fmt(const char* f, ...) {
    va_list ap;
    va_start(ap, f);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- classifier accuracy on the full synthetic corpus ------------------

void check_classifier_accuracy(const traffgen::DatasetPair& pair) {
    auto t0 = std::chrono::steady_clock::now();
    ml::Trainer tr = ml::make_trainer("forest", {{"n_trees", 100}, {"attrs_per_split", 3}});
    double acc_id = ml::cross_validate(pair.identifier, tr, 10, 1).second;
    double acc_res = ml::cross_validate(pair.resolution, tr, 10, 1).second;
    double wall = seconds_since(t0);
    bool pass = pair.identifier.size() == 8000 && pair.resolution.size() == 4000 &&
                acc_id >= 0.90 && acc_res >= 0.90 && wall < 120.0;
    report("classifier accuracy", pass,
           fmt("identifier=%.4f resolution=%.4f (floor 0.90 each, 10-fold, %zu/%zu instances) "
               "in %.1fs (limit 120)",
               acc_id, acc_res, pair.identifier.size(), pair.resolution.size(), wall));
}

// ---- attribute interactions beat any single-attribute stump ------------

void check_grid_structure() {
    traffgen::DatasetConfig dc;
    dc.video_flows = 125;
    dc.download_flows = 125;
    dc.seed = 2;
    auto pair = traffgen::generate_datasets(dc);

    std::vector<ml::ParamList> grid;
    for (double d : {1, 2, 3, 5, 8})
        for (double a : {1, 3, 5})
            grid.push_back({{"max_depth", d}, {"attrs_per_split", a}, {"n_trees", 15}});
    auto points = ml::tune_grid(pair.identifier, "forest", grid, 10, 1);

    double best = points.front().accuracy;
    double stump_best = 0.0;
    for (const auto& p : points)
        for (const auto& [k, v] : p.params)
            if (k == "max_depth" && v == 1.0)
                stump_best = std::max(stump_best, p.accuracy);
    bool pass = best >= stump_best + 0.03;
    report("depth/attrs grid structure", pass,
           fmt("grid best=%.4f depth-1 best=%.4f gap=%.1fpts (needs >= 3.0)", best, stump_best,
               100.0 * (best - stump_best)));
}

// ---- accuracy grows with flow age --------------------------------------

void check_attribute_maturity(const traffgen::DatasetPair& pair) {
    ml::Trainer tr = ml::make_trainer("forest", {{"n_trees", 30}, {"attrs_per_split", 3}});
    auto early = ml::filter_by_window(pair.identifier, "[1,16]");
    auto late = ml::filter_by_window(pair.identifier, "[65,128]");
    double acc_early = ml::cross_validate(early, tr, 10, 1).second;
    double acc_late = ml::cross_validate(late, tr, 10, 1).second;
    bool pass = acc_late >= acc_early + 0.15;
    report("window maturity gap", pass,
           fmt("[1,16]=%.4f [65,128]=%.4f gap=%.1fpts (needs >= 15.0)", acc_early, acc_late,
               100.0 * (acc_late - acc_early)));
}

// ---- sustained table churn ----------------------------------------------

void check_stress_churn() {
    auto t0 = std::chrono::steady_clock::now();
    traffgen::StressSource src;
    replay::Engine eng;
    auto sum = eng.run(src);
    double wall = seconds_since(t0);

    // Steady window: every second in [45,135) receives installs from a full
    // complement of earlier flow cohorts, so the rate must sit at the spawn
    // rate of 280 flows per second.
    size_t in_window = 0;
    for (double t : sum.install_times)
        in_window += (t >= 45.0 && t < 135.0);
    double rate = double(in_window) / 90.0;

    bool pass = sum.installs == 31920 && sum.flows_seen == 31920 && std::abs(rate - 280.0) <= 14.0 &&
                sum.last_mirror_second < 220 && sum.polled_bytes == sum.generated_bytes &&
                sum.table_full == 0 && wall < 300.0;
    report("stress churn", pass,
           fmt("installs=%llu (needs 31920) steady rate=%.1f/s (needs 280 +-5%%) "
               "mirror quiet at t=%llds (needs < 220) polled=%llu generated=%llu (must be equal) "
               "in %.1fs (limit 300)",
               (unsigned long long)sum.installs, rate, (long long)sum.last_mirror_second,
               (unsigned long long)sum.polled_bytes, (unsigned long long)sum.generated_bytes,
               wall));
}

// ---- attribute availability by flow age ---------------------------------

void check_cv_availability() {
    bool age20 = available_cv_scales(20) == std::vector<int>{1, 2, 4};
    size_t mismatches = 0;
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t len = rng.uniform_int(400);
        auto scales = available_cv_scales(len);
        std::set<int> got(scales.begin(), scales.end());
        for (int k : kCvScales)
            if (got.count(k) != size_t(len / size_t(k) >= 4))
                ++mismatches;
    }
    bool pass = age20 && mismatches == 0;
    report("cv scale availability", pass,
           fmt("age-20 scales {1,2,4}: %s; 1000 random lengths vs floor(len/k)>=4: %zu mismatches",
               age20 ? "yes" : "no", mismatches));
}

// ---- numeric oracles -----------------------------------------------------

std::optional<long double> cv_oracle(const Profile& profile, int k) {
    size_t windows = profile.size() / size_t(k);
    if (windows < 4)
        return std::nullopt;
    long double total = 0;
    for (uint64_t b : profile)
        total += b;
    long double mu = total / (long double)profile.size();
    if (mu <= 0)
        return std::nullopt;
    long double mean = 0;
    std::vector<long double> rates;
    for (size_t w = 0; w < windows; ++w) {
        long double bytes = 0;
        for (size_t i = w * k; i < (w + 1) * size_t(k); ++i)
            bytes += profile[i];
        rates.push_back(bytes / k);
        mean += rates.back();
    }
    mean /= rates.size();
    long double var = 0;
    for (long double r : rates)
        var += (r - mean) * (r - mean);
    return sqrtl(var / rates.size()) / mu;
}

size_t run_cv_oracle(size_t& compared) {
    size_t failures = 0;
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        size_t len = 1 + rng.uniform_int(200);
        Profile p(len);
        for (auto& b : p)
            b = rng.uniform() < 0.2 ? 0 : rng.uniform_int(2'000'000);
        for (int k : kCvScales) {
            auto got = coefficient_of_variation(p, k);
            auto want = cv_oracle(p, k);
            if (got.has_value() != want.has_value()) {
                ++failures;
                continue;
            }
            if (!got)
                continue;
            ++compared;
            double w = double(*want);
            if (std::abs(*got - w) > 1e-9 * std::max(1.0, std::abs(w)))
                ++failures;
        }
    }
    return failures;
}

double entropy2(double a, double b) {
    double total = a + b;
    if (total <= 0)
        return 0.0;
    double h = 0.0;
    for (double w : {a, b})
        if (w > 0)
            h -= (w / total) * std::log2(w / total);
    return h;
}

// Exhaustive best gain ratio over every attribute and midpoint threshold,
// each candidate evaluated by a fresh partition scan (unit weights, no
// missing values, two classes).
double oracle_ratio_at(const ml::Dataset& d, int attr, double threshold) {
    double n = double(d.size()), n0 = 0;
    for (const auto& inst : d.instances)
        n0 += inst.label == 0 ? 1 : 0;
    double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
    for (const auto& inst : d.instances) {
        bool left = inst.attrs.values[size_t(attr)] <= threshold;
        (inst.label == 0 ? (left ? l0 : r0) : (left ? l1 : r1)) += 1;
    }
    double wl = l0 + l1, wr = r0 + r1;
    double gain = entropy2(n0, n - n0) - (wl * entropy2(l0, l1) + wr * entropy2(r0, r1)) / n;
    double si = entropy2(wl, wr);
    return si > 0 ? gain / si : -1.0;
}

struct OracleSplit {
    bool found{false};
    double ratio{-1.0};
};

OracleSplit oracle_best_split(const ml::Dataset& d) {
    OracleSplit best;
    for (size_t a = 0; a < kAttributeCount; ++a) {
        std::vector<double> vals;
        for (const auto& inst : d.instances)
            vals.push_back(inst.attrs.values[a]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (size_t i = 0; i + 1 < vals.size(); ++i) {
            double t = (vals[i] + vals[i + 1]) / 2.0;
            double l = 0;
            for (const auto& inst : d.instances)
                l += inst.attrs.values[a] <= t ? 1 : 0;
            if (l < 1 - 1e-12 || double(d.size()) - l < 1 - 1e-12)
                continue;
            double ratio = oracle_ratio_at(d, int(a), t);
            double n = double(d.size()), n0 = 0;
            for (const auto& inst : d.instances)
                n0 += inst.label == 0 ? 1 : 0;
            double wl = l, wr = n - l;
            double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
            for (const auto& inst : d.instances) {
                bool left = inst.attrs.values[a] <= t;
                (inst.label == 0 ? (left ? l0 : r0) : (left ? l1 : r1)) += 1;
            }
            double gain =
                entropy2(n0, n - n0) - (wl * entropy2(l0, l1) + wr * entropy2(r0, r1)) / n;
            if (gain <= 1e-12 || entropy2(wl, wr) <= 1e-12)
                continue;
            if (ratio > best.ratio + 1e-12) {
                best.found = true;
                best.ratio = ratio;
            }
        }
    }
    return best;
}

ml::Instance rand_instance(Rng& rng) {
    ml::Instance inst;
    for (size_t a = 0; a < kAttributeCount; ++a) {
        inst.attrs.values[a] = double(rng.uniform_int(4));
        inst.attrs.present[a] = true;
    }
    inst.label = int(rng.uniform_int(2));
    return inst;
}

size_t run_tree_oracle(size_t& splits_checked) {
    size_t failures = 0;
    Rng rng(17);
    for (int trial = 0; trial < 400; ++trial) {
        ml::Dataset d;
        d.class_names = {"a", "b"};
        size_t n = 2 + rng.uniform_int(9);
        for (size_t i = 0; i < n; ++i)
            d.instances.push_back(rand_instance(rng));
        OracleSplit want = oracle_best_split(d);
        ml::TreeModel m = ml::train_tree(d, {.min_leaf = 1, .max_depth = 1});
        if (!want.found) {
            failures += m.nodes[0].is_leaf() ? 0 : 1;
            continue;
        }
        if (m.nodes[0].is_leaf()) {
            ++failures;
            continue;
        }
        ++splits_checked;
        double got = oracle_ratio_at(d, m.nodes[0].attr, m.nodes[0].threshold);
        if (std::abs(got - want.ratio) > 1e-9)
            ++failures;
    }
    return failures;
}

double run_mlp_fd() {
    ml::Dataset d;
    d.class_names = {"a", "b"};
    Rng rng(33);
    for (size_t i = 0; i < 24; ++i) {
        ml::Instance inst;
        inst.label = int(i % 2);
        for (size_t a = 0; a < kAttributeCount; ++a) {
            inst.attrs.values[a] = rng.uniform(0.0, 4.0) + (inst.label ? 5.0 : 0.0);
            inst.attrs.present[a] = true;
        }
        inst.weight = 1.0 + double(i % 3) * 0.5;
        if (i % 5 == 0)
            inst.attrs.present[i % kAttributeCount] = false;
        d.instances.push_back(inst);
    }
    ml::MlpModel m = ml::train_mlp(d, {.hidden_units = 3, .epochs = 0}, 11);
    ml::MlpGradient g = ml::mlp_loss_and_gradient(m, d);
    std::vector<double> w = ml::flatten_weights(m);
    double h = 1e-6, worst = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        std::vector<double> wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        ml::unflatten_weights(m, wp);
        double lp = ml::mlp_loss_and_gradient(m, d).loss;
        ml::unflatten_weights(m, wm);
        double lm = ml::mlp_loss_and_gradient(m, d).loss;
        double fd = (lp - lm) / (2 * h);
        double denom = std::max({1e-8, std::abs(fd), std::abs(g.grad[i])});
        worst = std::max(worst, std::abs(fd - g.grad[i]) / denom);
    }
    return worst;
}

size_t run_dns_fuzz() {
    size_t failures = 0;
    Rng rng(53);
    const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-";
    for (int trial = 0; trial < 1000; ++trial) {
        std::string name;
        size_t labels = 1 + rng.uniform_int(4);
        for (size_t l = 0; l < labels; ++l) {
            if (l)
                name.push_back('.');
            size_t len = 1 + rng.uniform_int(15);
            for (size_t i = 0; i < len; ++i)
                name.push_back(alphabet[rng.uniform_int(alphabet.size())]);
        }
        std::vector<uint32_t> ips(1 + rng.uniform_int(5));
        for (auto& ip : ips)
            ip = uint32_t(rng.next_u64());
        std::string lowered = name;
        for (char& c : lowered)
            c = char(std::tolower(static_cast<unsigned char>(c)));
        try {
            DnsReply r = dns::parse_reply(dns::encode_reply(name, ips, uint16_t(trial)));
            if (r.query_name != lowered || r.answer_ips != ips)
                ++failures;
        } catch (const DataError&) {
            ++failures;
        }
    }
    return failures;
}

void check_numeric_oracles() {
    size_t cv_compared = 0, tree_splits = 0;
    size_t cv_fail = run_cv_oracle(cv_compared);
    size_t tree_fail = run_tree_oracle(tree_splits);
    double mlp_worst = run_mlp_fd();
    size_t dns_fail = run_dns_fuzz();
    bool pass = cv_fail == 0 && cv_compared > 500 && tree_fail == 0 && tree_splits > 100 &&
                mlp_worst < 1e-4 && dns_fail == 0;
    report("numeric oracles", pass,
           fmt("cv two-pass: %zu/%zu mismatches (tol 1e-9); root split vs exhaustive scan: "
               "%zu/%zu mismatches; mlp gradient vs central differences: worst rel err %.2e "
               "(tol 1e-4); dns fuzz: %zu/1000 failures",
               cv_fail, cv_compared, tree_fail, tree_splits, mlp_worst, dns_fail));
}

// ---- switch pipeline invariants ------------------------------------------

PacketRecord make_pkt(const FlowKey& k, double ts, uint64_t bytes) {
    PacketRecord p;
    p.timestamp = ts;
    p.key = k;
    p.bytes = bytes;
    return p;
}

FlowKey tcp_key(uint32_t n) {
    return FlowKey::make(0x0a000000 + n, 0x0a010000 + n, uint16_t(40000 + n % 20000), 443,
                         kProtoTcp);
}

void check_pipeline_invariants() {
    std::vector<std::string> problems;

    // Mirroring stops the instant an exact-match entry exists and resumes
    // after idle expiry.
    {
        SwitchState sw;
        uint32_t gid = sw.ensure_group("p");
        FlowKey k = tcp_key(7);
        bool pre = sw.process_packet(make_pkt(k, 1.0, 100)).mirrored;
        sw.install_reactive(k, gid);
        bool post = false;
        for (double t = 2; t < 20; ++t)
            post |= sw.process_packet(make_pkt(k, t, 100)).mirrored;
        sw.expire_idle(100.0);
        bool resumed = sw.process_packet(make_pkt(k, 101.0, 100)).mirrored;
        if (!pre || post || !resumed)
            problems.push_back("mirror suppression");
    }

    // Idle timeout is strictly greater than 60 seconds.
    {
        SwitchState sw;
        uint32_t gid = sw.ensure_group("p");
        FlowKey k = tcp_key(5);
        sw.process_packet(make_pkt(k, 10.0, 1));
        sw.install_reactive(k, gid);
        sw.process_packet(make_pkt(k, 10.0, 1));
        if (!sw.expire_idle(70.0).empty() || sw.expire_idle(70.0001).size() != 1)
            problems.push_back("60s idle boundary");
    }

    // Randomized storm: every byte is forwarded exactly once, and mirrored
    // bytes are exactly the bytes that matched the proactive table.
    {
        Rng rng(71);
        SwitchState sw(25);
        uint64_t sent = 0, mirrored = 0;
        double t = 0.0;
        for (int step = 0; step < 4000; ++step) {
            t += rng.uniform(0, 0.05);
            uint32_t n = uint32_t(rng.uniform_int(40));
            FlowKey k = n % 7 == 0 ? FlowKey::make(n, n + 1, 0, 0, 1) : tcp_key(n);
            uint64_t bytes = 1 + rng.uniform_int(1500);
            bool installed = sw.find(k) != nullptr;
            auto d = sw.process_packet(make_pkt(k, t, bytes));
            sent += bytes;
            if (d.mirrored)
                mirrored += bytes;
            bool route_ok = installed ? (d.matched == MatchedTable::reactive && !d.mirrored)
                            : k.is_tcp_or_udp()
                                ? (d.matched == MatchedTable::proactive && d.mirrored)
                                : (d.matched == MatchedTable::fallback && !d.mirrored);
            if (!route_ok) {
                problems.push_back("table precedence");
                break;
            }
            if (!installed && k.is_tcp_or_udp() && rng.uniform() < 0.02)
                sw.install_reactive(k, sw.ensure_group("p"));
            if (rng.uniform() < 0.01)
                sw.expire_idle(t);
        }
        if (sw.total_forwarded_bytes() != sent || sw.total_mirrored_bytes() != mirrored)
            problems.push_back("byte conservation");
    }

    // Counter polls chunk at 2500 entries.
    {
        SwitchState sw;
        uint32_t gid = sw.ensure_group("p");
        for (uint32_t i = 0; i < 6000; ++i)
            sw.install_reactive(tcp_key(i), gid);
        auto snap = sw.poll_counters();
        bool sizes_ok = snap.chunks.size() == 3 && snap.chunks[0].size() == 2500 &&
                        snap.chunks[1].size() == 2500 && snap.chunks[2].size() == 1000;
        SwitchState sw2;
        uint32_t g2 = sw2.ensure_group("p");
        for (uint32_t i = 0; i < kPollChunkSize; ++i)
            sw2.install_reactive(tcp_key(i), g2);
        bool boundary_ok = sw2.poll_counters().chunks.size() == 1;
        sw2.install_reactive(tcp_key(kPollChunkSize), g2);
        boundary_ok = boundary_ok && sw2.poll_counters().chunks.size() == 2;
        if (!sizes_ok || !boundary_ok)
            problems.push_back("2500-entry chunking");
    }

    std::string detail = "mirror suppression, 60s idle boundary, byte conservation, "
                         "table precedence, 2500-entry chunking all hold";
    if (!problems.empty()) {
        detail = "violated:";
        for (const auto& p : problems)
            detail += " " + p;
    }
    report("pipeline invariants", problems.empty(), detail);
}

}  // namespace

int main() {
    traffgen::DatasetConfig dc;  // 500 video + 500 download flows, seed 1
    auto pair = traffgen::generate_datasets(dc);

    check_classifier_accuracy(pair);
    check_grid_structure();
    check_attribute_maturity(pair);
    check_stress_churn();
    check_cv_availability();
    check_numeric_oracles();
    check_pipeline_invariants();

    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
