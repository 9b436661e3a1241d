#include "itele/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "itele/config.hpp"
#include "itele/log.hpp"
#include "itele/ml/evaluate.hpp"
#include "itele/ml/model_io.hpp"
#include "itele/replay.hpp"
#include "itele/report.hpp"
#include "itele/traffgen.hpp"

namespace itele::cli {

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out;
    uint64_t seed{0};
    bool seed_set{false};
};

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::from_file(path);
}

uint64_t resolve_seed(const CommonArgs& a, const Config& cfg) {
    if (a.seed_set) return a.seed;
    return uint64_t(cfg.get_int("seed", 1));
}

const std::vector<std::string> kReservedKeys = {"mode", "seed"};

bool reserved(const std::string& key) {
    return std::find(kReservedKeys.begin(), kReservedKeys.end(), key) != kReservedKeys.end();
}

double numeric_value(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("parameter '" + key + "' is not numeric: " + value);
    }
}

/// Every non-reserved config key becomes a training parameter.
ml::ParamList params_from_config(const Config& cfg) {
    ml::ParamList params;
    for (const auto& [k, v] : cfg.entries())
        if (!reserved(k)) params.emplace_back(k, numeric_value(k, v));
    return params;
}

/// Grid axis: "3" -> {3}; "1,2,5" -> {1,2,5}; "1..12" -> {1,...,12}.
std::vector<double> grid_axis(const std::string& key, const std::string& spec) {
    std::vector<double> values;
    if (auto dots = spec.find(".."); dots != std::string::npos) {
        auto lo = (long long)numeric_value(key, spec.substr(0, dots));
        auto hi = (long long)numeric_value(key, spec.substr(dots + 2));
        if (hi < lo) throw ConfigError("grid range for '" + key + "' is reversed");
        for (long long v = lo; v <= hi; ++v) values.push_back(double(v));
        return values;
    }
    size_t pos = 0;
    while (true) {
        size_t comma = spec.find(',', pos);
        std::string piece = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
        values.push_back(numeric_value(key, piece));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

std::vector<ml::ParamList> grid_from_config(const Config& cfg) {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (const auto& [k, v] : cfg.entries())
        if (!reserved(k)) axes.emplace_back(k, grid_axis(k, v));
    if (axes.empty()) throw ConfigError("tuning grid has no parameters");
    std::vector<ml::ParamList> grid{{}};
    for (const auto& [key, values] : axes) {
        std::vector<ml::ParamList> next;
        next.reserve(grid.size() * values.size());
        for (const auto& base : grid) {
            for (double v : values) {
                ml::ParamList point = base;
                point.emplace_back(key, v);
                next.push_back(std::move(point));
            }
        }
        grid = std::move(next);
    }
    return grid;
}

void write_text(const std::string& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot write " + path);
    std::fwrite(text.data(), 1, text.size(), f);
    if (std::fclose(f) != 0) throw DataError("write failed: " + path);
}

int cmd_generate(const CommonArgs& a) {
    Config cfg = Config::from_file(a.config_path);
    uint64_t seed = resolve_seed(a, cfg);
    std::string mode = cfg.get_str("mode", "trace");

    if (mode == "dataset") {
        traffgen::DatasetConfig dc;
        dc.video_flows = size_t(cfg.get_int("video_flows", 500));
        dc.download_flows = size_t(cfg.get_int("download_flows", 500));
        dc.seed = seed;
        traffgen::DatasetPair pair = traffgen::generate_datasets(dc);
        ml::save_dataset(pair.identifier, a.out + "_identifier.tsv");
        ml::save_dataset(pair.resolution, a.out + "_resolution.tsv");
        std::printf("wrote %s_identifier.tsv (%zu instances)\n", a.out.c_str(),
                    pair.identifier.size());
        std::printf("wrote %s_resolution.tsv (%zu instances)\n", a.out.c_str(),
                    pair.resolution.size());
        return 0;
    }
    if (mode == "trace") {
        traffgen::TraceConfig tc;
        tc.video_flows = size_t(cfg.get_int("video_flows", 4));
        tc.download_flows = size_t(cfg.get_int("download_flows", 3));
        tc.mice_flows = size_t(cfg.get_int("mice_flows", 6));
        tc.span = cfg.get_double("span", 30);
        tc.duration = size_t(cfg.get_int("duration", 160));
        tc.mtu = size_t(cfg.get_int("mtu", 1500));
        tc.seed = seed;
        traffgen::TraceData data = traffgen::generate_trace(tc);
        trace::TraceWriter w(a.out);
        for (const auto& pkt : data.packets) w.write(pkt);
        w.close();
        trace::write_truth(data.truth, a.out + ".truth");
        std::printf("wrote %s (%zu packets, %zu flows)\n", a.out.c_str(), data.packets.size(),
                    data.truth.size());
        return 0;
    }
    if (mode == "stress") {
        traffgen::StressConfig sc;
        sc.pairs = size_t(cfg.get_int("pairs", 14));
        sc.blocks_per_pair = size_t(cfg.get_int("blocks_per_pair", 20));
        sc.flows_per_block = size_t(cfg.get_int("flows_per_block", 114));
        sc.rate_min_mbps = cfg.get_double("rate_min_mbps", 0.8);
        sc.rate_max_mbps = cfg.get_double("rate_max_mbps", 1.2);
        sc.duration = size_t(cfg.get_int("duration", 300));
        sc.seed = seed;
        traffgen::StressSource src(sc);
        trace::TraceWriter w(a.out);
        trace::TracePacket pkt;
        while (src.next(pkt)) w.write(pkt);
        w.close();
        trace::write_truth(src.truth(), a.out + ".truth");
        std::printf("wrote %s (%llu packets, %zu flows)\n", a.out.c_str(),
                    (unsigned long long)w.packets_written(), src.total_flows());
        return 0;
    }
    throw ConfigError("unknown mode '" + mode + "' (expected dataset, trace, or stress)");
}

broker::Models load_models(const std::string& dir) {
    ml::LoadedModel ident = ml::load_model(dir + "/identifier.json");
    ml::LoadedModel resol = ml::load_model(dir + "/resolution.json");
    broker::Models m;
    m.loaded = true;
    m.identifier = std::move(ident.predict);
    m.identifier_classes = std::move(ident.class_names);
    m.resolution = std::move(resol.predict);
    m.resolution_classes = std::move(resol.class_names);
    return m;
}

int cmd_replay(const CommonArgs& a, const std::string& trace_path, const std::string& models_dir,
               const std::string& speed) {
    Config cfg = load_config(a.config_path);
    replay::ReplayOptions ro;
    ro.table_capacity = size_t(cfg.get_int("table_capacity", (long long)kDefaultTableCapacity));
    ro.elephant_threshold = uint64_t(
        cfg.get_int("elephant_threshold", (long long)inspector::kElephantThresholdBytes));
    ro.gc_interval = cfg.get_double("gc_interval", 30);
    ro.drain_limit = cfg.get_double("drain_limit", 200);
    ro.debounce_resolution_changes = cfg.get_bool("debounce_resolution_changes", true);
    ro.realtime = speed == "realtime";

    replay::Engine eng(ro);
    if (cfg.has("provider_map")) eng.providers().load_suffixes(cfg.require_str("provider_map"));
    if (!models_dir.empty()) eng.set_models(load_models(models_dir));

    trace::TraceReader src(trace_path);
    replay::ReplaySummary summary = eng.run(src);
    report::write_replay_report(eng, summary, a.out);
    std::printf(
        "replayed %llu packets: %llu elephants, %llu installs, %llu verdicts; report in %s\n",
        (unsigned long long)summary.packets, (unsigned long long)summary.elephants,
        (unsigned long long)summary.installs, (unsigned long long)summary.verdicts,
        a.out.c_str());
    return 0;
}

int cmd_train(const CommonArgs& a, const std::string& data_path, const std::string& algorithm) {
    Config cfg = load_config(a.config_path);
    uint64_t seed = resolve_seed(a, cfg);
    ml::Dataset data = ml::load_dataset(data_path);
    ml::ParamList params = params_from_config(cfg);
    if (algorithm == "tree") {
        ml::save_model(ml::train_tree(data, ml::tree_params(params), seed), a.out);
    } else if (algorithm == "forest") {
        ml::save_model(ml::train_forest(data, ml::forest_params(params), seed), a.out);
    } else if (algorithm == "mlp") {
        ml::save_model(ml::train_mlp(data, ml::mlp_params(params), seed), a.out);
    } else {
        throw ConfigError("unknown algorithm '" + algorithm + "'");
    }
    std::printf("wrote %s\n", a.out.c_str());
    return 0;
}

int cmd_tune(const CommonArgs& a, const std::string& data_path, const std::string& algorithm) {
    Config cfg = Config::from_file(a.config_path);
    uint64_t seed = resolve_seed(a, cfg);
    ml::Dataset data = ml::load_dataset(data_path);
    std::vector<ml::GridPoint> points = ml::tune_grid(data, algorithm, grid_from_config(cfg),
                                                      10, seed);
    std::string rep = ml::format_grid_report(points);
    std::fputs(rep.c_str(), stdout);
    if (!a.out.empty()) write_text(a.out, rep);
    return 0;
}

int cmd_eval(const CommonArgs& a, const std::string& data_path, const std::string& algorithm) {
    Config cfg = load_config(a.config_path);
    uint64_t seed = resolve_seed(a, cfg);
    ml::Dataset data = ml::load_dataset(data_path);
    ml::Trainer trainer = ml::make_trainer(algorithm, params_from_config(cfg));
    auto [cm, acc] = ml::cross_validate(data, trainer, 10, seed);
    std::fputs(cm.to_string().c_str(), stdout);
    return 0;
}

int cmd_report(const CommonArgs& a, const std::string& in_dir) {
    report::write_analytics(in_dir, a.out);
    std::printf("analytics written to %s\n", a.out.c_str());
    return 0;
}

int cmd_accuracy_curve(const CommonArgs& a, const std::string& data_path,
                       const std::string& algorithm) {
    Config cfg = load_config(a.config_path);
    uint64_t seed = resolve_seed(a, cfg);
    ml::Dataset data = ml::load_dataset(data_path);
    if (!data.has_windows())
        throw ConfigError("dataset has no window annotations; regenerate with mode=dataset");
    ml::Trainer trainer = ml::make_trainer(algorithm, params_from_config(cfg));
    std::string table = "window\taccuracy\n";
    for (const std::string& w : ml::distinct_windows(data)) {
        auto [cm, acc] = ml::cross_validate(ml::filter_by_window(data, w), trainer, 10, seed);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s\t%.4f\n", w.c_str(), acc);
        table += buf;
    }
    std::fputs(table.c_str(), stdout);
    if (!a.out.empty()) write_text(a.out, table);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"flow telemetry simulator and video classification toolkit"};
    app.require_subcommand(1);

    CommonArgs a;
    std::string data_path, trace_path, models_dir, in_dir, algorithm;
    std::string speed = "max";

    auto add_common = [&](CLI::App* cmd, bool out_required) {
        cmd->add_option("--config", a.config_path, "key=value configuration file");
        auto* s = cmd->add_option("--seed", a.seed, "RNG seed (overrides config)");
        cmd->callback([s, &a] { a.seed_set = s->count() > 0; });
        auto* o = cmd->add_option("--out", a.out, "output path");
        if (out_required) o->required();
    };

    CLI::App* gen = app.add_subcommand("generate", "generate a dataset, trace, or stress trace");
    gen->add_option("--config", a.config_path, "generation config (mode=dataset|trace|stress)")
        ->required();
    auto* gen_seed = gen->add_option("--seed", a.seed, "RNG seed (overrides config)");
    gen->callback([gen_seed, &a] { a.seed_set = gen_seed->count() > 0; });
    gen->add_option("--out", a.out, "output path (dataset mode: prefix)")->required();

    CLI::App* rep = app.add_subcommand("replay", "replay a trace through the pipeline");
    rep->add_option("--trace", trace_path, "trace file")->required();
    rep->add_option("--models", models_dir, "directory with identifier.json + resolution.json");
    rep->add_option("--speed", speed, "realtime or max")
        ->check(CLI::IsMember({"realtime", "max"}));
    add_common(rep, true);

    CLI::App* train = app.add_subcommand("train", "train a model and write it to a file");
    train->add_option("--data", data_path, "dataset file")->required();
    train->add_option("--algorithm", algorithm, "tree, forest, or mlp")->required();
    add_common(train, true);

    CLI::App* tune = app.add_subcommand("tune", "cross-validate a parameter grid");
    tune->add_option("--data", data_path, "dataset file")->required();
    tune->add_option("--algorithm", algorithm, "tree, forest, or mlp")->required();
    tune->add_option("--config", a.config_path, "grid axes, e.g. max_depth=1..12")->required();
    auto* tune_seed = tune->add_option("--seed", a.seed, "RNG seed (overrides config)");
    tune->callback([tune_seed, &a] { a.seed_set = tune_seed->count() > 0; });
    tune->add_option("--out", a.out, "also write the grid report here");

    CLI::App* eval = app.add_subcommand("eval", "10-fold cross-validated confusion matrix");
    eval->add_option("--data", data_path, "dataset file")->required();
    eval->add_option("--algorithm", algorithm, "tree, forest, or mlp")->required();
    add_common(eval, false);

    CLI::App* rpt = app.add_subcommand("report", "derive analytics from a replay report");
    rpt->add_option("--in", in_dir, "replay report directory")->required();
    rpt->add_option("--out", a.out, "analytics output directory")->required();

    CLI::App* curve = app.add_subcommand("accuracy-curve", "per-window cross-validated accuracy");
    curve->add_option("--data", data_path, "window-annotated dataset file")->required();
    curve->add_option("--algorithm", algorithm, "tree, forest, or mlp")->required();
    add_common(curve, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        // app.exit prints contextual help or the error; 0 means --help/--version.
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(a);
        if (rep->parsed()) return cmd_replay(a, trace_path, models_dir, speed);
        if (train->parsed()) return cmd_train(a, data_path, algorithm);
        if (tune->parsed()) return cmd_tune(a, data_path, algorithm);
        if (eval->parsed()) return cmd_eval(a, data_path, algorithm);
        if (rpt->parsed()) return cmd_report(a, in_dir);
        if (curve->parsed()) return cmd_accuracy_curve(a, data_path, algorithm);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace itele::cli
