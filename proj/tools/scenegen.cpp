// Command-line front end: learns the network from accident records, scores
// and ranks risk scenarios, and executes them in the built-in 2D simulator.
//
// Subcommands: synth, learn, validate, generate, run, and a pipeline umbrella
// that chains all stages. Every command is deterministic given the same
// config and seed. Exit codes: 0 success, 1 runtime failure, 2 usage/config
// error.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scenegen/accident_data.hpp"
#include "scenegen/defaults.hpp"
#include "scenegen/discovery.hpp"
#include "scenegen/graph_metrics.hpp"
#include "scenegen/json_io.hpp"
#include "scenegen/metrics.hpp"
#include "scenegen/riskgen.hpp"
#include "scenegen/sim.hpp"
#include "scenegen/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scenegen;

namespace {

// ---------------------------------------------------------------------------
// Logging (SCENEGEN_LOG: debug | info | warn | error; default warn)

int log_level() {
    static int level = [] {
        const char* env = std::getenv("SCENEGEN_LOG");
        std::string s = env ? env : "warn";
        if (s == "debug") return 0;
        if (s == "info") return 1;
        if (s == "warn") return 2;
        return 3;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() <= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() <= 0) std::cerr << "[debug] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Config

struct PipelineConfig {
    // paths
    std::string data_path;         // accident record CSV
    std::string constraints_path;  // knowledge constraints JSON ("" = defaults)
    std::string net_path;          // learned net JSON ("" = <out>/net.json)
    std::string truth_net_path;    // optional ground truth for SHD/SID
    std::string scenarios_path;    // risk scenario list ("" = <out>/risk_scenarios.json)
    std::string out_dir = "out";
    // stages
    std::size_t synth_rows = 20000;
    DiscoveryParams discovery;
    std::string method = "cbn";  // cbn | random
    double threshold = kDefaultDeduceThreshold;
    std::size_t budget = 100;  // random baseline iterations
    double sim_duration = 20.0;
    std::size_t concretizations = 1;   // concrete draws per logical scenario
    std::size_t max_scenarios = 10;    // cap on scenarios sent to the simulator
    std::size_t jobs = 1;
    std::uint64_t seed = 7;
};

PipelineConfig load_config(const std::string& path) {
    PipelineConfig cfg;
    if (path.empty()) return cfg;
    json j = load_json(path);
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        cfg.data_path = p.value("data", "");
        cfg.constraints_path = p.value("constraints", "");
        cfg.net_path = p.value("net", "");
        cfg.truth_net_path = p.value("truth_net", "");
        cfg.scenarios_path = p.value("scenarios", "");
        cfg.out_dir = p.value("out", cfg.out_dir);
    }
    cfg.synth_rows = j.value("synth_rows", cfg.synth_rows);
    if (j.contains("discovery")) {
        const auto& d = j["discovery"];
        cfg.discovery.ess = d.value("ess", cfg.discovery.ess);
        cfg.discovery.max_parents = d.value("max_parents", cfg.discovery.max_parents);
        cfg.discovery.ci_alpha = d.value("ci_alpha", cfg.discovery.ci_alpha);
        cfg.discovery.restarts = d.value("restarts", cfg.discovery.restarts);
        std::string m = d.value("ci_method", "g_square");
        if (m == "g_square") cfg.discovery.ci_method = CiMethod::g_square;
        else if (m == "chi_square") cfg.discovery.ci_method = CiMethod::chi_square;
        else if (m == "mutual_information") cfg.discovery.ci_method = CiMethod::mutual_information;
        else throw InvalidInput("unknown ci_method '" + m + "'");
    }
    if (j.contains("generator")) {
        const auto& g = j["generator"];
        cfg.method = g.value("method", cfg.method);
        cfg.threshold = g.value("threshold", cfg.threshold);
        cfg.budget = g.value("budget", cfg.budget);
    }
    if (j.contains("run")) {
        const auto& r = j["run"];
        cfg.sim_duration = r.value("duration", cfg.sim_duration);
        cfg.concretizations = r.value("concretizations", cfg.concretizations);
        cfg.max_scenarios = r.value("max_scenarios", cfg.max_scenarios);
        cfg.jobs = r.value("jobs", cfg.jobs);
    }
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

std::string out_file(const PipelineConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

KnowledgeConstraints default_constraints() {
    KnowledgeConstraints c;
    std::vector<std::string> statics(static_factor_names());
    statics.push_back("junction");
    c.tiers = {statics, {"actor_action"}, {"severity"}};
    return c;
}

// ---------------------------------------------------------------------------
// Stages

void cmd_synth(const PipelineConfig& cfg) {
    auto net = default_net();
    auto data = synthesize_dataset(net, cfg.synth_rows, cfg.seed);
    write_records(out_file(cfg, "data.csv"), data);
    save_json(out_file(cfg, "truth_net.json"), net_to_json(net));
    log_info("synth: " + std::to_string(data.size()) + " rows written");
}

void cmd_learn(const PipelineConfig& cfg) {
    std::string data_path = cfg.data_path.empty() ? out_file(cfg, "data.csv") : cfg.data_path;
    auto data = parse_records(data_path, canonical_schema());
    if (data.size() == 0) throw InvalidInput("dataset '" + data_path + "' has no rows");

    KnowledgeConstraints constraints;
    if (cfg.constraints_path.empty()) {
        constraints = default_constraints();
    } else {
        if (!fs::exists(cfg.constraints_path))
            throw InvalidInput("constraints not found: '" + cfg.constraints_path + "'");
        constraints = constraints_from_json(load_json(cfg.constraints_path));
    }

    auto t0 = std::chrono::steady_clock::now();
    auto dag = greedy_search(data, constraints, cfg.discovery, cfg.seed);
    auto net = fit_parameters(dag, data, 1.0);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string net_path = cfg.net_path.empty() ? out_file(cfg, "net.json") : cfg.net_path;
    save_json(net_path, net_to_json(net));
    {
        std::ofstream dot(out_file(cfg, "net.dot"));
        dot << dag_to_dot(dag);
    }

    json report = {{"seed", cfg.seed},
                   {"rows", data.size()},
                   {"bdeu_score", bdeu_score(dag, data, cfg.discovery.ess)},
                   {"edge_count", dag.edge_count()},
                   {"meta", {{"wall_seconds", seconds}}}};
    std::string truth_path = cfg.truth_net_path;
    if (truth_path.empty() && fs::exists(out_file(cfg, "truth_net.json")))
        truth_path = out_file(cfg, "truth_net.json");
    if (!truth_path.empty()) {
        auto truth = net_from_json(load_json(truth_path));
        report["shd"] = shd(to_cpdag(truth.dag()), to_cpdag(dag));
        report["sid"] = sid(truth.dag(), dag);
    }
    save_json(out_file(cfg, "learn_report.json"), report);
    log_info("learn: net written to " + net_path);
}

CausalBayesNet load_net(const PipelineConfig& cfg) {
    std::string net_path = cfg.net_path.empty() ? out_file(cfg, "net.json") : cfg.net_path;
    if (fs::exists(net_path)) return net_from_json(load_json(net_path));
    log_info("no learned net at '" + net_path + "', using the built-in reference net");
    return default_net();
}

void cmd_validate(const PipelineConfig& cfg) {
    auto net = load_net(cfg);
    std::string data_path = cfg.data_path.empty() ? out_file(cfg, "data.csv") : cfg.data_path;
    Dataset data = fs::exists(data_path)
                       ? parse_records(data_path, canonical_schema())
                       : synthesize_dataset(net, cfg.synth_rows, cfg.seed);

    auto schema = net.schema();
    std::size_t av = schema.index_of("actor_action");
    Treatment treatment{"actor_action",
                        static_cast<int>(schema.state_index(av, "sudden_brake")),
                        static_cast<int>(schema.state_index(av, "none"))};
    ValueMap values = severity_values();

    auto est = estimate_effect(net, treatment, "severity", values);
    json refuters = json::array();
    refuters.push_back(refutation_to_json(refute_random_common_cause(
        net, data, treatment, "severity", values, cfg.seed)));
    refuters.push_back(refutation_to_json(refute_placebo_treatment(
        net, data, treatment, "severity", values, 20, cfg.seed)));
    refuters.push_back(refutation_to_json(refute_data_subset(
        net, data, treatment, "severity", values, 0.5, 20, cfg.seed)));

    bool all_high = true;
    for (const auto& r : refuters)
        if (!r.at("high_confidence").get<bool>()) all_high = false;
    json report = {{"treatment", "actor_action: sudden_brake vs none"},
                   {"outcome", "severity"},
                   {"model_effect", est.value},
                   {"adjustment_set", est.adjustment_set},
                   {"refuters", refuters},
                   {"all_high_confidence", all_high}};
    save_json(out_file(cfg, "validation_report.json"), report);
    log_info("validate: " + std::to_string(refuters.size()) + " refuters run");
}

void cmd_generate(const PipelineConfig& cfg) {
    if (cfg.method != "cbn" && cfg.method != "random")
        throw InvalidInput("method must be 'cbn' or 'random'");
    auto net = load_net(cfg);
    auto seeds = default_seed_scenarios();
    auto actions = default_action_catalog();

    std::vector<RiskScenario> scenarios;
    GenerationReport report;
    if (cfg.method == "cbn") {
        auto patterns = default_pattern_catalog();
        std::tie(scenarios, report) = generate(seeds, patterns, actions, net, cfg.threshold);
    } else {
        std::tie(scenarios, report) =
            random_baseline_generate(seeds, net, actions, cfg.budget, cfg.seed, cfg.threshold);
    }

    json out = json::array();
    for (const auto& rs : scenarios) out.push_back(risk_scenario_to_json(rs));
    std::string scen_path =
        cfg.scenarios_path.empty() ? out_file(cfg, "risk_scenarios.json") : cfg.scenarios_path;
    save_json(scen_path, out);
    json rep = generation_report_to_json(report);
    rep["method"] = cfg.method;
    rep["seed"] = cfg.seed;
    save_json(out_file(cfg, "generation_report.json"), rep);
    {
        std::ofstream csv(out_file(cfg, "risk_scenarios.csv"));
        csv << risk_scenarios_to_csv(scenarios);
    }
    log_info("generate(" + cfg.method + "): " + std::to_string(scenarios.size()) +
             " scenarios, " + std::to_string(report.iterations) + " iterations");
}

struct RunResult {
    std::string id;
    MetricReport metrics;
    Verdict verdict;
    SimLog log;
};

void cmd_run(const PipelineConfig& cfg) {
    std::string scen_path =
        cfg.scenarios_path.empty() ? out_file(cfg, "risk_scenarios.json") : cfg.scenarios_path;
    if (!fs::exists(scen_path))
        throw InvalidInput("scenario list not found: '" + scen_path + "'");
    std::vector<RiskScenario> scenarios;
    for (const auto& j : load_json(scen_path)) scenarios.push_back(risk_scenario_from_json(j));
    if (scenarios.size() > cfg.max_scenarios) scenarios.resize(cfg.max_scenarios);

    // fan out concrete executions over worker threads; results keep their
    // scenario-id order regardless of completion order
    struct Task {
        std::size_t scenario_idx;
        std::size_t draw;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        for (std::size_t d = 0; d < cfg.concretizations; ++d) tasks.push_back({i, d});
    std::vector<RunResult> results(tasks.size());
    std::vector<std::string> errors(tasks.size());

    auto t0 = std::chrono::steady_clock::now();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= tasks.size()) return;
            const auto& task = tasks[k];
            const auto& rs = scenarios[task.scenario_idx];
            try {
                auto concrete =
                    concretize(rs.scenario, 1, cfg.seed + 1000 * task.scenario_idx + task.draw);
                auto world = build_world(concrete[0]);
                auto log = run(world, cfg.sim_duration);
                RunResult res;
                res.id = std::to_string(task.scenario_idx) + "_" + rs.provenance.seed_id + "#" +
                         std::to_string(task.draw);
                res.metrics = compute_metrics(log);
                res.verdict = classify(res.metrics);
                res.log = std::move(log);
                results[k] = std::move(res);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    std::size_t n_threads = std::max<std::size_t>(1, cfg.jobs);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (std::size_t k = 0; k < tasks.size(); ++k)
        if (!errors[k].empty())
            throw std::runtime_error("scenario " + std::to_string(tasks[k].scenario_idx) +
                                     " failed: " + errors[k]);

    std::ofstream metrics_csv(out_file(cfg, "metrics.csv"));
    metrics_csv << metric_csv_header() << "\n";
    std::size_t risk_found = 0;
    json per_scenario = json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        write_sim_log_csv(out_file(cfg, "sim_" + std::to_string(k) + ".csv"), r.log);
        metrics_csv << metric_csv_row(r.id, r.metrics, r.verdict) << "\n";
        json m = metric_report_to_json(r.metrics, r.verdict);
        m["scenario"] = r.id;
        m["events"] = events_to_json(r.log);
        per_scenario.push_back(m);
        if (r.verdict.risk_found) ++risk_found;
        log_debug("run: " + r.id + (r.verdict.risk_found ? " -> risk" : " -> nominal"));
    }

    // campaign summary in the style of the start-up accounting table: every
    // executed scenario is one simulator start-up
    json summary = {{"method", cfg.method},
                    {"startup_count", results.size()},
                    {"scenarios_executed", results.size()},
                    {"risk_found", risk_found},
                    {"yield", results.empty() ? 0.0
                                              : static_cast<double>(risk_found) /
                                                    static_cast<double>(results.size())},
                    {"seed", cfg.seed},
                    {"per_scenario", per_scenario},
                    {"meta", {{"total_seconds", seconds}}}};
    save_json(out_file(cfg, "run_summary.json"), summary);
    log_info("run: " + std::to_string(results.size()) + " executions, " +
             std::to_string(risk_found) + " risky");
}

void cmd_pipeline(const PipelineConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    cmd_synth(cfg);
    cmd_learn(cfg);
    cmd_validate(cfg);
    cmd_generate(cfg);
    cmd_run(cfg);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json report = {{"stages", {"synth", "learn", "validate", "generate", "run"}},
                   {"seed", cfg.seed},
                   {"method", cfg.method},
                   {"learn", load_json(out_file(cfg, "learn_report.json"))},
                   {"validation", load_json(out_file(cfg, "validation_report.json"))},
                   {"generation", load_json(out_file(cfg, "generation_report.json"))},
                   {"run", load_json(out_file(cfg, "run_summary.json"))},
                   {"meta", {{"total_seconds", seconds}}}};
    report["run"].erase("per_scenario");  // keep the umbrella report compact
    save_json(out_file(cfg, "pipeline_report.json"), report);
    log_info("pipeline: complete");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal-network risk scenario generation toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, method;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs, budget, rows;
    app.add_option("--config", config_path, "pipeline config JSON")->configurable(false);
    app.add_option("--seed", seed, "global RNG seed");
    app.add_option("--method", method, "generation method: cbn | random")
        ->check(CLI::IsMember({"cbn", "random"}));
    app.add_option("--jobs", jobs, "worker threads for scenario execution");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--budget", budget, "random baseline iteration budget");
    app.add_option("--rows", rows, "synthetic dataset size");

    auto* synth = app.add_subcommand("synth", "sample a synthetic accident dataset");
    auto* learn = app.add_subcommand("learn", "learn the network from accident records");
    auto* validate = app.add_subcommand("validate", "refutation-test the learned effects");
    auto* generate = app.add_subcommand("generate", "deduce and rank risk scenarios");
    auto* run = app.add_subcommand("run", "execute scenarios in the 2D simulator");
    auto* pipeline = app.add_subcommand("pipeline", "synth, learn, validate, generate, run");
    for (auto* sub : {synth, learn, validate, generate, run, pipeline}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help is success; any parse error is usage
    }

    try {
        PipelineConfig cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!method.empty()) cfg.method = method;
        if (jobs) cfg.jobs = *jobs;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (budget) cfg.budget = *budget;
        if (rows) cfg.synth_rows = *rows;

        if (synth->parsed()) cmd_synth(cfg);
        else if (learn->parsed()) cmd_learn(cfg);
        else if (validate->parsed()) cmd_validate(cfg);
        else if (generate->parsed()) cmd_generate(cfg);
        else if (run->parsed()) cmd_run(cfg);
        else if (pipeline->parsed()) cmd_pipeline(cfg);
        return 0;
    } catch (const InvalidInput& e) {
        std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "config"}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", e.what()}, {"kind", "runtime"}}.dump() << "\n";
        return 1;
    }
}
