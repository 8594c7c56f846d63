#include "cortex/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace cortex {

using nlohmann::json;

namespace {

json layer_json(const std::string& name, int size, const std::string& learning,
                bool inhibitory = false) {
    return json{{"name", name}, {"size", size}, {"learning", learning},
                {"inhibitory", inhibitory}};
}

json proj_json(const std::string& src, const std::string& dst, const std::string& bank,
               bool plastic, int delay, double density, double lo, double hi,
               double fixed = 0.5) {
    return json{{"name", src + "_" + dst}, {"src", src},        {"dst", dst},
                {"bank", bank},            {"plastic", plastic}, {"delay", delay},
                {"density", density},      {"init", {lo, hi}},   {"fixed_weight", fixed}};
}

}  // namespace

json default_experiment_config(const std::string& kind) {
    json c;
    c["experiment"] = kind;
    c["duration"] = 50000;
    c["plasticity"] = "all";
    c["dynamics"] = {{"theta", 1.0},         {"delta", 0.05},  {"trace_decay", 0.95},
                     {"trace_increment", 0.4}, {"lr_ff", 0.01}, {"lr_fb", 0.01},
                     {"lr_m", 0.02},          {"m_window", 20}, {"use_trace", true},
                     {"per_tic_penalty", false}};
    c["environment"] = {{"grid", 20},        {"target_size", 2},     {"episode_gap", 20},
                        {"areas", 8},        {"per_area", 10},       {"engage_window", 5},
                        {"engage_threshold", 10}, {"object_radius", 8.5},
                        {"capture_radius", 1.0},  {"episode_limit", 80}};
    c["snapshots"] = {{"interval", 0}};
    c["usefulness"] = {{"enabled", true}, {"via", "V"}, {"regularizer", "l2"}, {"eta", 1.0},
                       {"eval_window", 2000}};

    if (kind == "tracker") {
        c["sleep"] = {{"enabled", true},
                      {"interval", 1000},
                      {"k_ff", {{"V", 20}, {"D", 20}, {"M", 15}}},
                      {"k_fb", {{"V", 5}, {"D", 5}}}};
        c["environment"]["delay_line"] = 3;
        json layers = json::array({layer_json("S", 400, "none"),
                                   layer_json("V", 100, "feedback"),
                                   layer_json("D", 100, "feedback"),
                                   layer_json("INH", 100, "none", true),
                                   layer_json("M", 80, "reward")});
        json projs = json::array(
            {proj_json("S", "V", "drive", true, 0, 1.0, 0.0, 0.2),
             proj_json("S", "D", "drive", true, 3, 1.0, 0.0, 0.2),
             proj_json("V", "M", "drive", true, 0, 1.0, 0.0, 0.2),
             proj_json("D", "M", "drive", true, 0, 1.0, 0.0, 0.2),
             proj_json("M", "V", "feedback", true, 0, 1.0, 0.0, 0.2),
             proj_json("M", "D", "feedback", true, 0, 1.0, 0.0, 0.2),
             proj_json("V", "INH", "drive", false, 0, 0.1, 0.3, 0.3),
             proj_json("D", "INH", "drive", false, 0, 0.1, 0.3, 0.3),
             proj_json("M", "INH", "drive", false, 1, 0.2, 0.6, 0.6),
             proj_json("INH", "V", "inhibit", false, 1, 0.1, 0, 0, 0.5),
             proj_json("INH", "D", "inhibit", false, 1, 0.1, 0, 0, 0.5),
             proj_json("INH", "M", "inhibit", false, 0, 0.1, 0, 0, 0.5)});
        c["topology"] = {{"layers", layers}, {"projections", projs}};
    } else if (kind == "foveator") {
        c["sleep"] = {{"enabled", true},
                      {"interval", 1000},
                      {"k_ff", {{"V", 20}, {"M", 15}}},
                      {"k_fb", {{"V", 5}}}};
        json layers = json::array({layer_json("S", 400, "none"),
                                   layer_json("V", 100, "feedback"),
                                   layer_json("INH", 50, "none", true),
                                   layer_json("M", 80, "reward")});
        json projs = json::array(
            {proj_json("S", "V", "drive", true, 0, 1.0, 0.0, 0.2),
             proj_json("V", "M", "drive", true, 0, 1.0, 0.0, 0.2),
             proj_json("M", "V", "feedback", true, 0, 1.0, 0.0, 0.2),
             proj_json("V", "INH", "drive", false, 0, 0.1, 0.3, 0.3),
             proj_json("M", "INH", "drive", false, 1, 0.2, 0.6, 0.6),
             proj_json("INH", "V", "inhibit", false, 1, 0.1, 0, 0, 0.5),
             proj_json("INH", "M", "inhibit", false, 0, 0.1, 0, 0, 0.5)});
        c["topology"] = {{"layers", layers}, {"projections", projs}};
    } else {
        throw ConfigError("unknown experiment preset: " + kind);
    }
    return c;
}

void merge_config(json& base, const json& overlay) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            merge_config(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

namespace {

// topology.projections_override / layers_override patch named entries of the
// preset arrays without respecifying the whole list
void apply_topology_overrides(json& config) {
    if (!config.contains("topology")) return;
    json& topo = config["topology"];
    if (topo.contains("projections_override")) {
        for (auto it = topo["projections_override"].begin();
             it != topo["projections_override"].end(); ++it) {
            bool found = false;
            for (json& p : topo["projections"])
                if (p["name"] == it.key()) {
                    merge_config(p, it.value());
                    found = true;
                }
            if (!found) throw ConfigError("projections_override: no projection " + it.key());
        }
        topo.erase("projections_override");
    }
    if (topo.contains("layers_override")) {
        for (auto it = topo["layers_override"].begin(); it != topo["layers_override"].end();
             ++it) {
            bool found = false;
            for (json& l : topo["layers"])
                if (l["name"] == it.key()) {
                    merge_config(l, it.value());
                    found = true;
                }
            if (!found) throw ConfigError("layers_override: no layer " + it.key());
        }
        topo.erase("layers_override");
    }
}

}  // namespace

json load_experiment_config(const std::string& path_or_preset) {
    if (path_or_preset == "tracker" || path_or_preset == "foveator")
        return default_experiment_config(path_or_preset);
    std::ifstream in(path_or_preset);
    if (!in) throw ConfigError("cannot open config: " + path_or_preset);
    json user = json::parse(in);
    std::string kind = user.value("experiment", "tracker");
    json base = default_experiment_config(kind);
    merge_config(base, user);
    apply_topology_overrides(base);
    return base;
}

namespace {

void env_walk(json& node, std::string path, const std::string& prefix) {
    if (!node.is_object()) return;
    for (auto it = node.begin(); it != node.end(); ++it) {
        std::string key = it.key();
        std::transform(key.begin(), key.end(), key.begin(), ::toupper);
        std::string full = path.empty() ? key : path + "_" + key;
        json& v = it.value();
        if (v.is_object()) {
            env_walk(v, full, prefix);
            continue;
        }
        const char* raw = std::getenv((prefix + "_" + full).c_str());
        if (!raw) continue;
        std::string sval(raw);
        if (v.is_boolean())
            v = sval == "true" || sval == "1";
        else if (v.is_number_integer())
            v = std::stoll(sval);
        else if (v.is_number())
            v = std::stod(sval);
        else if (v.is_string())
            v = sval;
    }
}

}  // namespace

void apply_env_overrides(json& config, const std::string& prefix) {
    env_walk(config, "", prefix);
}

void apply_plasticity_mode(json& config) {
    std::string mode = config.value("plasticity", "all");
    if (mode == "all") return;
    if (mode != "m_only") throw ConfigError("unknown plasticity mode: " + mode);
    std::map<std::string, std::string> learning;
    for (const json& l : config["topology"]["layers"])
        learning[l["name"]] = l.value("learning", "none");
    for (json& p : config["topology"]["projections"]) {
        bool keep = p["bank"] == "drive" && learning[p["dst"]] == "reward";
        if (!keep) p["plastic"] = false;
    }
}

void apply_ablation(json& config, const std::string& axis) {
    if (axis == "delay") {
        std::string sensor = config["topology"]["layers"][0]["name"];
        for (json& p : config["topology"]["projections"])
            if (p["src"] == sensor) p["delay"] = 0;
    } else if (axis == "feedback") {
        config["plasticity"] = "m_only";
    } else if (axis == "trace") {
        config["dynamics"]["use_trace"] = false;
    } else {
        throw ConfigError("unknown ablation axis: " + axis);
    }
}

Topology topology_from_json(const json& t) {
    Topology topo;
    for (const json& l : t.at("layers")) {
        LayerSpec spec;
        spec.name = l.at("name");
        spec.size = l.at("size");
        spec.inhibitory = l.value("inhibitory", false);
        std::string learn = l.value("learning", "none");
        if (learn == "none")
            spec.learning = Learning::None;
        else if (learn == "feedback")
            spec.learning = Learning::Feedback;
        else if (learn == "reward")
            spec.learning = Learning::Reward;
        else
            throw ConfigError("unknown learning mode: " + learn);
        topo.layers.push_back(std::move(spec));
    }
    for (const json& p : t.at("projections")) {
        ProjectionSpec spec;
        spec.name = p.at("name");
        spec.src = p.at("src");
        spec.dst = p.at("dst");
        std::string bank = p.value("bank", "drive");
        if (bank == "drive")
            spec.bank = Bank::Drive;
        else if (bank == "inhibit")
            spec.bank = Bank::Inhibit;
        else if (bank == "feedback")
            spec.bank = Bank::Feedback;
        else
            throw ConfigError("unknown bank: " + bank);
        spec.plastic = p.value("plastic", false);
        spec.delay = p.value("delay", 0);
        spec.mask_density = p.value("density", 1.0);
        if (p.contains("init")) {
            spec.init_lo = p["init"][0];
            spec.init_hi = p["init"][1];
        }
        spec.fixed_weight = p.value("fixed_weight", 0.5);
        if (p.contains("src_range")) {
            spec.src_lo = p["src_range"][0];
            spec.src_hi = p["src_range"][1];
        }
        if (p.contains("dst_range")) {
            spec.dst_lo = p["dst_range"][0];
            spec.dst_hi = p["dst_range"][1];
        }
        topo.projections.push_back(std::move(spec));
    }
    topo.validate();
    return topo;
}

DynamicsConfig dynamics_from_json(const json& d) {
    DynamicsConfig dyn;
    dyn.theta = d.value("theta", dyn.theta);
    dyn.delta = d.value("delta", dyn.delta);
    dyn.trace_decay = d.value("trace_decay", dyn.trace_decay);
    dyn.trace_increment = d.value("trace_increment", dyn.trace_increment);
    dyn.lr_ff = d.value("lr_ff", dyn.lr_ff);
    dyn.lr_fb = d.value("lr_fb", dyn.lr_fb);
    dyn.lr_m = d.value("lr_m", dyn.lr_m);
    dyn.m_window = d.value("m_window", dyn.m_window);
    dyn.use_trace = d.value("use_trace", dyn.use_trace);
    dyn.per_tic_penalty = d.value("per_tic_penalty", dyn.per_tic_penalty);
    if (d.contains("penalty_regularizer"))
        dyn.penalty_cfg.regularizer =
            regularizer_from_string(d["penalty_regularizer"].get<std::string>());
    dyn.penalty_cfg.eta = d.value("penalty_eta", dyn.penalty_cfg.eta);
    dyn.penalty_cfg.theta = dyn.theta;
    return dyn;
}

SleepConfig sleep_from_json(const json& s) {
    SleepConfig sc;
    sc.enabled = s.value("enabled", true);
    sc.interval = s.value("interval", 1000);
    if (s.contains("k_ff"))
        for (auto it = s["k_ff"].begin(); it != s["k_ff"].end(); ++it)
            sc.k_ff[it.key()] = it.value();
    if (s.contains("k_fb"))
        for (auto it = s["k_fb"].begin(); it != s["k_fb"].end(); ++it)
            sc.k_fb[it.key()] = it.value();
    return sc;
}

Matrix path_average_matrix(const Network& net, const std::string& src_layer,
                           const std::string& via_layer, const std::string& m_layer,
                           int area_begin, int area_end, bool feedback_path) {
    const Topology& topo = net.topology();
    std::string first, second;
    for (const ProjectionSpec& p : topo.projections) {
        if (p.src == src_layer && p.dst == via_layer && p.bank == Bank::Drive) first = p.name;
        if (!feedback_path && p.src == via_layer && p.dst == m_layer && p.bank == Bank::Drive)
            second = p.name;
        if (feedback_path && p.src == m_layer && p.dst == via_layer && p.bank == Bank::Feedback)
            second = p.name;
    }
    if (first.empty() || second.empty())
        throw ConfigError("no projection chain " + src_layer + "->" + via_layer + "->" + m_layer);

    auto [via_n, src_n] = net.projection_shape(first);
    const std::vector<double>& w1 = net.projection_weights(first);
    const std::vector<uint8_t>& m1 = net.projection_mask(first);
    const std::vector<double>& w2 = net.projection_weights(second);
    const std::vector<uint8_t>& m2 = net.projection_mask(second);
    auto [rows2, cols2] = net.projection_shape(second);

    // per via neuron: sum and count of the motor-side weights in the area
    std::vector<double> wsum(via_n, 0.0);
    std::vector<double> cnt(via_n, 0.0);
    for (int v = 0; v < via_n; ++v) {
        for (int k = area_begin; k < area_end; ++k) {
            size_t idx = feedback_path ? size_t(v) * cols2 + k : size_t(k) * cols2 + v;
            (void)rows2;
            if (!m2[idx]) continue;
            wsum[v] += w2[idx];
            cnt[v] += 1.0;
        }
    }

    int grid = static_cast<int>(std::lround(std::sqrt(double(src_n))));
    Matrix out;
    out.rows = grid;
    out.cols = grid;
    out.data.assign(size_t(grid) * grid, 0.0);
    for (int s = 0; s < src_n; ++s) {
        double val = 0.0, paths = 0.0;
        for (int v = 0; v < via_n; ++v) {
            size_t idx = size_t(v) * src_n + s;
            if (!m1[idx]) continue;
            val += w1[idx] * wsum[v];
            paths += cnt[v];
        }
        out.data[s] = paths > 0.0 ? val / paths : 0.0;
    }
    return out;
}

RunResult run_experiment(const json& config, uint64_t seed, const std::string& snapshot_dir) {
    json cfg = config;
    apply_plasticity_mode(cfg);

    Topology topo = topology_from_json(cfg.at("topology"));
    DynamicsConfig dyn = dynamics_from_json(cfg.value("dynamics", json::object()));
    SleepConfig sleep = sleep_from_json(cfg.value("sleep", json::object()));
    Network net(topo, dyn, sleep, seed);

    const json& env = cfg.at("environment");
    int areas = env.value("areas", 8);
    int per_area = env.value("per_area", 10);
    ActuatorBank bank(areas, per_area, env.value("engage_window", 5),
                      env.value("engage_threshold", 10));

    std::string kind = cfg.value("experiment", "tracker");
    int64_t duration = cfg.value("duration", 50000);

    std::string m_name;
    for (const LayerSpec& l : topo.layers)
        if (l.learning == Learning::Reward) m_name = l.name;
    if (m_name.empty()) throw ConfigError("no reward layer in topology");
    int m_size = topo.layers[topo.layer_index(m_name)].size;
    if (m_size != areas * per_area)
        throw ConfigError("reward layer size must equal areas*per_area");

    TrackerWorld::Config tcfg;
    FoveatorWorld::Config fcfg;
    tcfg.grid = fcfg.grid = env.value("grid", 20);
    tcfg.block = fcfg.block = env.value("target_size", 2);
    tcfg.episode_gap = fcfg.episode_gap = env.value("episode_gap", 20);
    fcfg.object_radius = env.value("object_radius", 8.5);
    fcfg.capture_radius = env.value("capture_radius", 1.0);
    fcfg.episode_limit = env.value("episode_limit", 80);

    uint64_t world_seed = seed ^ 0x9E3779B97F4A7C15ULL;
    TrackerWorld tracker(tcfg, world_seed);
    FoveatorWorld foveator(fcfg, world_seed);
    bool is_tracker = kind == "tracker";

    RunResult result;
    result.seed = seed;
    result.metrics.per_area_events.assign(areas, 0);
    result.metrics.per_area_correct.assign(areas, 0);

    const json& ucfg = cfg.value("usefulness", json::object());
    bool track_usefulness = ucfg.value("enabled", true);
    std::string via = ucfg.value("via", "V");
    bool have_via = true;
    try {
        topo.layer_index(via);
    } catch (const ConfigError&) {
        have_via = false;
    }
    track_usefulness = track_usefulness && have_via;

    int via_n = track_usefulness ? topo.layers[topo.layer_index(via)].size : 0;
    std::vector<UsefulnessAccumulator> acc;
    if (track_usefulness)
        acc.assign(via_n, UsefulnessAccumulator(m_size));
    ScoringConfig diag_cfg(regularizer_from_string(ucfg.value("regularizer", std::string("l2"))),
                           ucfg.value("eta", 1.0), dyn.theta);
    int64_t eval_window = ucfg.value("eval_window", 2000);
    int64_t eval_start = std::max<int64_t>(0, duration - eval_window);

    // weight handles for the gap diagnostics
    std::string via_m_proj, m_via_proj;
    if (track_usefulness) {
        for (const ProjectionSpec& p : topo.projections) {
            if (p.src == via && p.dst == m_name && p.bank == Bank::Drive) via_m_proj = p.name;
            if (p.src == m_name && p.dst == via && p.bank == Bank::Feedback) m_via_proj = p.name;
        }
        if (via_m_proj.empty() || m_via_proj.empty()) track_usefulness = false;
    }

    double gap_sum = 0.0, weight_sum = 0.0, gmap_sum = 0.0;
    int64_t gap_samples = 0;

    int snapshot_interval = cfg.value("snapshots", json::object()).value("interval", 0);

    // optional per-tic spike record (line format: case_id layer-bitstrings...)
    const json& dbg = cfg.value("debug", json::object());
    std::ofstream dump;
    std::vector<std::string> dump_layers;
    int64_t dump_from = duration;
    if (dbg.contains("spike_dump")) {
        dump.open(dbg["spike_dump"].get<std::string>());
        for (const json& l : dbg.value("dump_layers", json::array({"V", "D", "M"})))
            dump_layers.push_back(l.get<std::string>());
        dump_from = std::max<int64_t>(0, duration - dbg.value("dump_last", 20000));
    }

    std::vector<int64_t> spike_totals(topo.layers.size(), 0);
    const int64_t curve_window = 5000;

    std::vector<double> mu_neuron(m_size, 0.0);
    for (int64_t t = 0; t < duration; ++t) {
        std::vector<uint8_t> input = is_tracker ? tracker.sensor() : foveator.sensor();
        const SpikeReport& rep = net.tic(input);
        for (size_t l = 0; l < rep.spikes.size(); ++l)
            for (uint8_t b : rep.spikes[l]) spike_totals[l] += b;
        const std::vector<uint8_t>& m_spikes = net.layer_spikes(m_name);
        bank.push(m_spikes);
        std::vector<uint8_t> engaged = bank.engaged();

        std::vector<double> mu_area = is_tracker ? tracker.score_engagements(engaged)
                                                 : foveator.score_and_move(engaged);

        if (result.windows.empty() || t - result.windows.back().start >= curve_window)
            result.windows.push_back({t, 0, 0});
        // metrics count engagements; the reward vector may additionally
        // reinforce a non-engaged matching area
        bool any_event = false;
        bool world_active = is_tracker ? tracker.episode_active() : foveator.episode_active();
        for (int a = 0; a < areas; ++a) {
            if (mu_area[a] != 0.0) any_event = true;
            if (!engaged[a] || !world_active) continue;
            bool good = is_tracker ? a == tracker.case_id() : mu_area[a] > 0.0;
            ++result.metrics.events;
            ++result.metrics.per_area_events[a];
            ++result.windows.back().events;
            if (good) {
                ++result.metrics.correct;
                ++result.metrics.per_area_correct[a];
                ++result.windows.back().correct;
            }
        }
        for (int a = 0; a < areas; ++a)
            for (int n = 0; n < per_area; ++n) mu_neuron[a * per_area + n] = mu_area[a];
        if (any_event) net.deliver_reward(m_name, mu_neuron);

        if (track_usefulness) {
            const std::vector<uint8_t>& vspk = net.layer_spikes(via);
            const std::vector<double>& vff = net.layer_ff_drive(via);
            for (int j = 0; j < via_n; ++j) acc[j].add(vspk[j], vff[j], m_spikes, mu_neuron);

            if (t >= eval_start) {
                const std::vector<double>& w_vm = net.projection_weights(via_m_proj);
                const std::vector<double>& w_mv = net.projection_weights(m_via_proj);
                for (int j = 0; j < via_n; ++j) {
                    if (!vspk[j]) continue;
                    double gap = 0.0, wmag = 0.0;
                    bool cospike = false;
                    for (int k = 0; k < m_size; ++k) {
                        if (!m_spikes[k]) continue;
                        cospike = true;
                        double w_down = w_vm[size_t(k) * via_n + j];
                        double w_back = w_mv[size_t(j) * m_size + k];
                        gap += w_down - w_back;
                        wmag += std::abs(w_down);
                    }
                    if (!cospike) continue;
                    gap_sum += std::abs(gap);
                    weight_sum += wmag;
                    gmap_sum += std::abs(usefulness_gap(diag_cfg, acc[j], vspk[j], m_spikes));
                    ++gap_samples;
                }
            }
        }

        if (dump.is_open() && t >= dump_from && world_active) {
            dump << (is_tracker ? tracker.case_id() : 0);
            for (const std::string& l : dump_layers) {
                dump << " ";
                for (uint8_t b : net.layer_spikes(l)) dump << int(b);
            }
            dump << "\n";
        }

        if (is_tracker)
            tracker.advance();
        else
            foveator.advance();

        if (sleep.enabled && (t + 1) % sleep.interval == 0) net.sleep_regularize();
        if (snapshot_interval > 0 && !snapshot_dir.empty() && (t + 1) % snapshot_interval == 0)
            net.save_weights_csv(snapshot_dir + "/tic_" + std::to_string(t + 1));

        ++result.metrics.tics;
    }

    if (!snapshot_dir.empty()) net.save_weights_csv(snapshot_dir + "/final");

    for (size_t l = 0; l < topo.layers.size(); ++l)
        result.layer_rates.emplace_back(topo.layers[l].name,
                                        duration > 0 ? double(spike_totals[l]) / duration : 0.0);

    if (track_usefulness) {
        for (int a = 0; a < areas; ++a) {
            result.ff_maps.push_back(path_average_matrix(net, topo.layers[0].name, via, m_name,
                                                         a * per_area, (a + 1) * per_area, false));
            result.fb_maps.push_back(path_average_matrix(net, topo.layers[0].name, via, m_name,
                                                         a * per_area, (a + 1) * per_area, true));
        }
        if (gap_samples > 0) {
            result.usefulness_gap_mean = gap_sum / gap_samples;
            result.downstream_weight_mean = weight_sum / gap_samples;
            result.gmap_gap_mean = gmap_sum / gap_samples;
            result.cospike_samples = gap_samples;
        }
    }
    return result;
}

Aggregate aggregate_metrics(const std::vector<RunResult>& runs) {
    Aggregate agg;
    agg.seeds = static_cast<int>(runs.size());
    if (runs.empty()) return agg;
    std::vector<double> pc, c1000;
    for (const RunResult& r : runs) {
        pc.push_back(r.metrics.percent_correct());
        c1000.push_back(r.metrics.correct_per_1000());
    }
    auto stats = [](std::vector<double> v, double& mean, double& median, double& sd) {
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += x;
        mean = s / v.size();
        median = v.size() % 2 ? v[v.size() / 2]
                              : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        double q = 0.0;
        for (double x : v) q += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(q / (v.size() - 1)) : 0.0;
    };
    stats(pc, agg.mean_pc, agg.median_pc, agg.std_pc);
    stats(c1000, agg.mean_c1000, agg.median_c1000, agg.std_c1000);
    return agg;
}

}  // namespace cortex
