// Copyright (C) 2026 The sensim Authors
// SPDX-License-Identifier: Apache-2.0
//
// sensim: city generation, simulation and analysis from the command line.
// Exit codes: 0 success, 1 data error, 2 usage or configuration error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensim/analysis.hpp"
#include "sensim/engine.hpp"
#include "sensim/geo_json.hpp"
#include "sensim/ledger.hpp"
#include "sensim/report.hpp"
#include "sensim/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sensim;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

/// Configuration or usage problem: exit 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Problem with input data: exit 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_out(const std::string& leaf) {
    const char* env = std::getenv("SENSIM_OUT_DIR");
    return (fs::path(env && *env ? env : "sensim-out") / leaf).string();
}

json invocation(int argc, char** argv) {
    json args = json::array();
    for (int i = 1; i < argc; ++i) {
        args.push_back(argv[i]);
    }
    return {{"tool", "sensim"}, {"git_describe", engine::git_describe()}, {"args", args}};
}

void write_json(const json& j, const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << j.dump(1) << '\n';
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError(std::string("cannot open ") + what + " '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed ") + what + " '" + path + "': " + e.what());
    }
}

/// Applies `a.b.c=value`; the value is parsed as JSON when possible, else taken as a string.
void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw UsageError("override '" + assignment + "' is not key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    json* node = &j;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) {
            throw UsageError("override key '" + key + "' has an empty segment");
        }
        parts.push_back(part);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const bool last = i + 1 == parts.size();
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(parts[i]);
            } catch (const std::exception&) {
                throw UsageError("override key '" + key + "': '" + parts[i] + "' is not an array index");
            }
            if (idx >= node->size()) {
                throw UsageError("override key '" + key + "': index " + parts[i] + " out of range");
            }
            node = &(*node)[idx];
        } else {
            if (!node->is_object()) {
                throw UsageError("override key '" + key + "' descends into a non-object");
            }
            node = &(*node)[parts[i]];
        }
        if (last) {
            *node = value;
        }
    }
}

ScenarioConfig load_scenario_with(const std::string& path, const std::vector<std::string>& overrides,
                                  std::optional<std::uint64_t> seed) {
    json j = read_json_file(path, "scenario");
    for (const auto& o : overrides) {
        apply_override(j, o);
    }
    ScenarioConfig c;
    try {
        c = scenario_from_json(j, fs::path(path).parent_path().string());
        if (seed) {
            c.master_seed = *seed;
        }
        validate(c);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError("invalid scenario '" + path + "': " + e.what());
    }
    return c;
}

geo::CityModel load_city_data(const std::string& path) {
    try {
        return geo::load_city(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

// ---------------------------------------------------------------------------

int cmd_gen_city(const std::string& config_path, std::uint64_t seed, std::string out, const json& inv) {
    geo::GenConfig cfg;
    try {
        cfg = read_json_file(config_path, "city config").get<geo::GenConfig>();
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError("invalid city config '" + config_path + "': " + e.what());
    }
    geo::CityModel city;
    try {
        city = geo::generate_city(cfg, seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError("invalid city config '" + config_path + "': " + e.what());
    }
    if (out.empty()) {
        out = default_out("city.json");
    }
    const fs::path p(out);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    geo::save_city(city, out);
    fs::path manifest = p;
    manifest.replace_extension(".manifest.json");
    write_json({{"invocation", inv}, {"seed", seed}, {"config", cfg}, {"sites", city.sites.size()},
                {"towers", city.towers.size()}, {"buildings", city.buildings.size()}},
               manifest);
    std::cout << "wrote " << out << " (" << city.sites.size() << " sites, " << city.towers.size() << " towers, "
              << city.buildings.size() << " buildings)\n";
    return kOk;
}

int cmd_default_config(std::string out) {
    if (out.empty()) {
        out = default_out("city_config.json");
    }
    write_json(json(default_city_config()), out);
    std::cout << "wrote " << out << "\n";
    return kOk;
}

int cmd_default_scenario(std::string out, int smoke_sites, const std::string& city_file) {
    ScenarioConfig c = smoke_sites > 0 ? smoke_scenario(smoke_sites) : default_scenario();
    if (!city_file.empty()) {
        c.city_generator.reset();
        c.city = load_city_data(city_file);
        c.city_file = fs::absolute(city_file).lexically_normal().string();
    }
    if (out.empty()) {
        out = default_out("scenario.json");
    }
    const fs::path p(out);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    save_scenario(c, out);
    std::cout << "wrote " << out << "\n";
    return kOk;
}

int cmd_simulate(const std::string& scenario_path, std::string out, const std::vector<std::string>& overrides,
                 std::optional<std::uint64_t> seed, int replicas, int jobs, const json& inv) {
    if (replicas < 1) {
        throw UsageError("--replicas must be at least 1");
    }
    // Everything is validated before any output directory exists.
    const ScenarioConfig base = load_scenario_with(scenario_path, overrides, seed);
    if (out.empty()) {
        out = default_out("run");
    }
    std::vector<ScenarioConfig> configs;
    for (int r = 0; r < replicas; ++r) {
        ScenarioConfig c = base;
        c.master_seed = base.master_seed + std::uint64_t(r);
        configs.push_back(std::move(c));
    }
    auto dir_of = [&](int r) {
        if (replicas == 1) {
            return out;
        }
        char leaf[32];
        std::snprintf(leaf, sizeof leaf, "replica-%03d", r);
        return (fs::path(out) / leaf).string();
    };
    std::mutex io;
    std::exception_ptr failure;
    auto work = [&](int r) {
        try {
            const engine::SimOutput result = engine::run(configs[std::size_t(r)]);
            engine::write_outputs(configs[std::size_t(r)], result, dir_of(r), inv);
            std::lock_guard lock(io);
            std::cout << "wrote " << dir_of(r) << " (" << result.ledger.rows.size() << " ledger rows, "
                      << result.episodes.size() << " PSM episodes)\n";
        } catch (...) {
            std::lock_guard lock(io);
            if (!failure) {
                failure = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, std::min(jobs > 0 ? jobs : int(std::thread::hardware_concurrency()), replicas));
    for (int first = 0; first < replicas; first += workers) {
        std::vector<std::thread> pool;
        for (int r = first; r < std::min(replicas, first + workers); ++r) {
            pool.emplace_back(work, r);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return kOk;
}

ledger::Ledger read_ledger_data(const std::string& path) {
    try {
        return ledger::read_ledger(path);
    } catch (const std::exception& e) {
        throw DataError(e.what());
    }
}

void check_nodes(const ledger::Ledger& l, const geo::CityModel& city) {
    const auto unknown = analysis::unknown_nodes(l, city);
    if (unknown.empty()) {
        return;
    }
    std::string msg = "ledger references " + std::to_string(unknown.size()) + " unknown site id(s):";
    for (std::size_t i = 0; i < unknown.size() && i < 20; ++i) {
        msg += " " + unknown[i];
    }
    if (unknown.size() > 20) {
        msg += " ...";
    }
    throw DataError(msg);
}

int cmd_clean(const std::string& ledger_path, const std::string& city_path, std::string out, const json& inv) {
    const geo::CityModel city = load_city_data(city_path);
    ledger::Ledger l = read_ledger_data(ledger_path);
    check_nodes(l, city);
    const analysis::CleanReport r = analysis::clean_in_place(l, city);
    if (out.empty()) {
        out = default_out("cleaned.csv");
    }
    const fs::path p(out);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    ledger::write_ledger(l, out);
    fs::path report = p;
    report.replace_extension(".report.json");
    write_json({{"invocation", inv},
                {"input", r.input_count()},
                {"kept", r.kept_count},
                {"dropped_no_connectivity", r.dropped_no_connectivity},
                {"dropped_zero_signal", r.dropped_zero_signal},
                {"dropped_out_of_bounds_tower", r.dropped_out_of_bounds_tower},
                {"dropped_delay_gt_24h", r.dropped_delay_gt_24h},
                {"flagged_unknown_tower", r.flagged_unknown_tower}},
               report);
    std::cout << "kept " << r.kept_count << " of " << r.input_count() << " rows -> " << out << "\n";
    return kOk;
}

struct AnalyzeArgs {
    std::string ledger;
    std::string city;
    std::string out;
    std::string psm;
    std::string scenario;
    bool no_clean = false;
    std::uint64_t seed = 1;
    std::size_t subsample = 5000;
    int permutations = 1000;
    int utc_offset_h = -6;
    std::string solstice;
};

int cmd_analyze(const AnalyzeArgs& a, const json& inv) {
    const geo::CityModel city = load_city_data(a.city);
    ledger::Ledger l = read_ledger_data(a.ledger);
    check_nodes(l, city);

    report::AnalysisOptions opt;
    opt.clean = !a.no_clean;
    opt.temporal = {a.subsample, a.permutations, a.seed, a.utc_offset_h};
    if (!a.solstice.empty()) {
        opt.solstice = parse_date(a.solstice);
        if (!opt.solstice) {
            throw UsageError("--solstice must be YYYY-MM-DD");
        }
    }
    if (!a.scenario.empty()) {
        const ScenarioConfig c = load_scenario_with(a.scenario, {}, std::nullopt);
        opt.radio = c.radio;
        opt.sampling_interval_s = c.sampling_interval_s;
    }
    std::optional<std::vector<power::PsmEpisode>> episodes;
    std::string psm_path = a.psm;
    if (psm_path.empty()) {
        const fs::path sibling = fs::path(a.ledger).parent_path() / "psm.csv";
        if (fs::exists(sibling)) {
            psm_path = sibling.string();
        }
    }
    if (!psm_path.empty()) {
        try {
            episodes = power::read_psm_csv(psm_path);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        for (const auto& e : *episodes) {
            if (!city.find_site(e.node_id)) {
                throw DataError("PSM file references unknown site id: " + e.node_id);
            }
        }
    }
    const std::string out = a.out.empty() ? default_out("analysis") : a.out;
    const report::AnalysisResult r = report::analyze(std::move(l), city, episodes, opt);
    json manifest = inv;
    manifest["ledger"] = fs::path(a.ledger).filename().string();
    manifest["city"] = fs::path(a.city).filename().string();
    manifest["psm"] = psm_path.empty() ? json(nullptr) : json(fs::path(psm_path).filename().string());
    report::write_analysis(r, out, manifest);
    std::cout << "wrote " << out << " (" << r.rows << " rows analyzed, " << r.dead.size() << " dead zones)\n";
    return kOk;
}

int cmd_report(const std::string& dir, std::string out) {
    if (out.empty()) {
        out = dir;
    }
    try {
        report::write_report(dir, out);
    } catch (const std::runtime_error& e) {
        throw DataError(e.what());
    }
    std::cout << "wrote " << (fs::path(out) / "report.md").string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensim: solar-powered LTE sensor network simulator"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", engine::git_describe());

    std::string out;
    std::uint64_t seed = kDefaultCitySeed;

    auto* gen = app.add_subcommand("gen-city", "Generate a city model from a generator config");
    std::string gen_config;
    gen->add_option("config", gen_config, "Generator config (JSON)")->required()->check(CLI::ExistingFile);
    gen->add_option("--seed", seed, "City seed");
    gen->add_option("-o,--output", out, "Output city file");

    auto* defcfg = app.add_subcommand("default-config", "Write the bundled Chicago-like generator config");
    defcfg->add_option("-o,--output", out, "Output file");

    auto* defscn = app.add_subcommand("default-scenario", "Write the default year-long scenario");
    int smoke = 0;
    std::string city_file;
    defscn->add_option("-o,--output", out, "Output file");
    defscn->add_option("--smoke", smoke, "Write the one-day smoke scenario with this many sites instead");
    defscn->add_option("--city-file", city_file, "Use this city file instead of the built-in generator")
        ->check(CLI::ExistingFile);

    auto* sim = app.add_subcommand("simulate", "Run a scenario");
    std::string scenario;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> sim_seed;
    int replicas = 1;
    int jobs = 0;
    sim->add_option("scenario", scenario, "Scenario file (JSON)")->required();
    sim->add_option("-o,--output", out, "Output directory");
    sim->add_option("--set", overrides, "Override a scenario key: dotted.key=value (repeatable)");
    sim->add_option("--seed", sim_seed, "Override master_seed");
    sim->add_option("--replicas", replicas, "Independent replicas with seeds master_seed + i");
    sim->add_option("--jobs", jobs, "Replicas run concurrently (default: hardware threads)");

    auto* cln = app.add_subcommand("clean", "Apply the cleaning rules to a ledger");
    std::string ledger_path;
    std::string city_path;
    cln->add_option("ledger", ledger_path, "ledger.csv")->required();
    cln->add_option("city", city_path, "city.json")->required();
    cln->add_option("-o,--output", out, "Cleaned ledger path");

    auto* ana = app.add_subcommand("analyze", "Compute report tables from a ledger");
    AnalyzeArgs aa;
    ana->add_option("ledger", aa.ledger, "ledger.csv")->required();
    ana->add_option("city", aa.city, "city.json")->required();
    ana->add_option("-o,--output", aa.out, "Report directory");
    ana->add_option("--psm", aa.psm, "PSM episodes (default: psm.csv next to the ledger, if present)");
    ana->add_option("--scenario", aa.scenario, "Scenario for radio parameters and sampling interval");
    ana->add_flag("--no-clean", aa.no_clean, "Analyze the ledger as given");
    ana->add_option("--seed", aa.seed, "Seed for weather, subsampling and permutations");
    ana->add_option("--subsample", aa.subsample, "Readings used by the temporal check");
    ana->add_option("--permutations", aa.permutations, "Permutations per temporal correlation");
    ana->add_option("--utc-offset", aa.utc_offset_h, "Local standard time offset in hours");
    ana->add_option("--solstice", aa.solstice, "Date for winter shadow minutes (YYYY-MM-DD)");

    auto* rep = app.add_subcommand("report", "Render an analysis directory as Markdown and SVG");
    std::string analysis_dir;
    rep->add_option("analysis_dir", analysis_dir, "Output of analyze")->required();
    rep->add_option("-o,--output", out, "Directory for report.md (default: the analysis directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    const json inv = invocation(argc, argv);
    try {
        if (*gen) {
            return cmd_gen_city(gen_config, seed, out, inv);
        }
        if (*defcfg) {
            return cmd_default_config(out);
        }
        if (*defscn) {
            return cmd_default_scenario(out, smoke, city_file);
        }
        if (*sim) {
            return cmd_simulate(scenario, out, overrides, sim_seed, replicas, jobs, inv);
        }
        if (*cln) {
            return cmd_clean(ledger_path, city_path, out, inv);
        }
        if (*ana) {
            return cmd_analyze(aa, inv);
        }
        if (*rep) {
            return cmd_report(analysis_dir, out);
        }
    } catch (const UsageError& e) {
        std::cerr << "sensim: " << e.what() << "\n";
        return kUsageError;
    } catch (const DataError& e) {
        std::cerr << "sensim: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "sensim: " << e.what() << "\n";
        return kDataError;
    }
    return kUsageError;
}
