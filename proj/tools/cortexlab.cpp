#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cortex/experiment.hpp"
#include "cortex/properness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<uint64_t> parse_seeds(const std::string& spec) {
    std::vector<uint64_t> seeds;
    if (spec.find(',') == std::string::npos) {
        uint64_t n = std::stoull(spec);
        for (uint64_t s = 1; s <= n; ++s) seeds.push_back(s);
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    }
    std::vector<uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw cortex::ConfigError("seeds must be distinct");
    if (seeds.empty()) throw cortex::ConfigError("need at least one seed");
    return seeds;
}

std::vector<cortex::RunResult> run_all_seeds(const json& config,
                                             const std::vector<uint64_t>& seeds,
                                             const std::string& snapshot_root) {
    std::vector<cortex::RunResult> results(seeds.size());
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    size_t next = 0;
    while (next < seeds.size()) {
        std::vector<std::future<void>> batch;
        for (unsigned w = 0; w < workers && next < seeds.size(); ++w, ++next) {
            size_t i = next;
            std::string snap =
                i == 0 && !snapshot_root.empty() ? snapshot_root + "/seed_" + std::to_string(seeds[i])
                                                 : "";
            batch.push_back(std::async(std::launch::async, [&, i, snap] {
                results[i] = cortex::run_experiment(config, seeds[i], snap);
            }));
        }
        for (auto& f : batch) f.get();
    }
    return results;
}

json metrics_json(const cortex::RunResult& r) {
    json rates = json::object();
    for (const auto& [layer, rate] : r.layer_rates) rates[layer] = rate;
    return json{{"seed", r.seed},
                {"tics", r.metrics.tics},
                {"events", r.metrics.events},
                {"correct", r.metrics.correct},
                {"percent_correct", r.metrics.percent_correct()},
                {"correct_per_1000", r.metrics.correct_per_1000()},
                {"usefulness_gap_mean", r.usefulness_gap_mean},
                {"downstream_weight_mean", r.downstream_weight_mean},
                {"gmap_gap_mean", r.gmap_gap_mean},
                {"cospike_samples", r.cospike_samples},
                {"layer_rates", rates},
                {"per_area_events", r.metrics.per_area_events},
                {"per_area_correct", r.metrics.per_area_correct},
                {"windows", [&] {
                     json w = json::array();
                     for (const auto& win : r.windows)
                         w.push_back({{"start", win.start},
                                      {"events", win.events},
                                      {"correct", win.correct}});
                     return w;
                 }()}};
}

json aggregate_json(const cortex::Aggregate& a) {
    return json{{"seeds", a.seeds},
                {"percent_correct",
                 {{"mean", a.mean_pc}, {"median", a.median_pc}, {"std", a.std_pc}}},
                {"correct_per_1000",
                 {{"mean", a.mean_c1000}, {"median", a.median_c1000}, {"std", a.std_c1000}}}};
}

void write_heatmaps(const std::vector<cortex::RunResult>& results, const std::string& dir) {
    if (results.empty() || results.front().ff_maps.empty()) return;
    fs::create_directories(dir);
    size_t areas = results.front().ff_maps.size();
    for (size_t a = 0; a < areas; ++a) {
        for (bool fb : {false, true}) {
            cortex::Matrix avg;
            int counted = 0;
            for (const cortex::RunResult& r : results) {
                const auto& maps = fb ? r.fb_maps : r.ff_maps;
                if (maps.empty()) continue;
                if (avg.data.empty()) {
                    avg = maps[a];
                } else {
                    for (size_t i = 0; i < avg.data.size(); ++i) avg.data[i] += maps[a].data[i];
                }
                ++counted;
            }
            if (counted == 0) continue;
            for (double& v : avg.data) v /= counted;
            std::string base = dir + "/area_" + std::to_string(a) + (fb ? "_fb" : "_ff");
            cortex::write_matrix_csv(base + ".csv", avg);
            cortex::write_pgm_with_sidecar(base, avg);
        }
    }
}

int cmd_run(const std::string& config_path, const std::string& seeds_spec,
            const std::string& out_dir, const std::string& ablate_axis) {
    json config = cortex::load_experiment_config(config_path);
    cortex::apply_env_overrides(config);
    if (!ablate_axis.empty()) cortex::apply_ablation(config, ablate_axis);
    std::vector<uint64_t> seeds = parse_seeds(seeds_spec);

    fs::create_directories(out_dir);
    std::vector<cortex::RunResult> results =
        run_all_seeds(config, seeds, out_dir + "/snapshots");

    std::ofstream metrics(out_dir + "/metrics.jsonl");
    for (const cortex::RunResult& r : results) metrics << metrics_json(r).dump() << "\n";

    cortex::Aggregate agg = cortex::aggregate_metrics(results);
    std::ofstream aggout(out_dir + "/aggregate.json");
    aggout << aggregate_json(agg).dump(2) << "\n";

    write_heatmaps(results, out_dir + "/heatmaps");

    std::ofstream cfgout(out_dir + "/resolved_config.json");
    cfgout << config.dump(2) << "\n";

    std::printf("%zu seed(s): percent_correct median %.2f (mean %.2f, std %.2f); "
                "correct/1000 median %.2f (mean %.2f)\n",
                seeds.size(), agg.median_pc, agg.mean_pc, agg.std_pc, agg.median_c1000,
                agg.mean_c1000);
    return 0;
}

int cmd_properness(const std::string& out_dir, uint64_t seed, int count) {
    fs::create_directories(out_dir);
    std::vector<cortex::SuiteSummary> suites;
    suites.push_back(cortex::properness_suite_selfree(cortex::Regularizer::L2, count, seed));
    suites.push_back(cortex::properness_suite_selfree(cortex::Regularizer::LH, count, seed));
    suites.push_back(cortex::properness_suite_selfree(cortex::Regularizer::L1, count, seed));
    suites.push_back(cortex::properness_suite_selective(30, seed));
    suites.push_back(cortex::adversarial_suite(10, seed));
    suites.push_back(cortex::fixed_point_suite(5, 20, seed));
    suites.push_back(cortex::gradient_check_suite(count >= 50 ? 1000 : 100, seed));

    cortex::write_report_jsonl(suites, out_dir + "/properness_report.jsonl");

    bool ok = true;
    for (const cortex::SuiteSummary& s : suites) {
        std::printf("%-28s %3d/%3d  worst gap %.3e  worst dist %.3e\n", s.name.c_str(), s.passed,
                    s.total, s.worst_gap, s.worst_distance);
        ok = ok && s.all_passed();
    }
    return ok ? 0 : 1;
}

int cmd_ablate(const std::string& config_path, const std::string& axis,
               const std::string& seeds_spec, const std::string& out_dir) {
    json base = cortex::load_experiment_config(config_path);
    cortex::apply_env_overrides(base);
    json ablated = base;
    cortex::apply_ablation(ablated, axis);
    std::vector<uint64_t> seeds = parse_seeds(seeds_spec);

    fs::create_directories(out_dir);
    std::vector<cortex::RunResult> rb = run_all_seeds(base, seeds, "");
    std::vector<cortex::RunResult> ra = run_all_seeds(ablated, seeds, "");
    cortex::Aggregate ab = cortex::aggregate_metrics(rb);
    cortex::Aggregate aa = cortex::aggregate_metrics(ra);

    json table{{"axis", axis},
               {"baseline", aggregate_json(ab)},
               {"ablated", aggregate_json(aa)},
               {"delta",
                {{"percent_correct_median", aa.median_pc - ab.median_pc},
                 {"correct_per_1000_median", aa.median_c1000 - ab.median_c1000}}}};
    std::ofstream out(out_dir + "/ablation_" + axis + ".json");
    out << table.dump(2) << "\n";

    std::printf("ablation %-8s  pc median %.2f -> %.2f   c/1000 median %.2f -> %.2f\n",
                axis.c_str(), ab.median_pc, aa.median_pc, ab.median_c1000, aa.median_c1000);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scoring-rule neuron simulation lab"};
    app.require_subcommand(1);

    std::string config = "tracker", seeds = "1", out = "out", axis;
    uint64_t lab_seed = 7;
    int lab_count = 50;

    CLI::App* run = app.add_subcommand("run", "run an experiment over seeds");
    run->add_option("--config", config, "config file or preset (tracker|foveator)");
    run->add_option("--seeds", seeds, "seed count or comma-separated list");
    run->add_option("--out", out, "output directory");

    CLI::App* prop = app.add_subcommand("properness", "run the verification suites");
    prop->add_option("--out", out, "output directory");
    prop->add_option("--seed", lab_seed, "master seed");
    prop->add_option("--count", lab_count, "instances per selectivity-free suite");

    CLI::App* abl = app.add_subcommand("ablate", "paired baseline/ablated runs");
    abl->add_option("--config", config, "config file or preset");
    abl->add_option("--ablate", axis, "axis: delay | feedback | trace")->required();
    abl->add_option("--seeds", seeds, "seed count or comma-separated list");
    abl->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config, seeds, out, "");
        if (prop->parsed()) return cmd_properness(out, lab_seed, lab_count);
        if (abl->parsed()) return cmd_ablate(config, axis, seeds, out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
