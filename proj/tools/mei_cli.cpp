// mei: synthetic worlds, exposure runs, summaries and input checks.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

#include "mei/error.hpp"
#include "mei/io.hpp"
#include "mei/pipeline.hpp"
#include "mei/report.hpp"
#include "mei/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct RunFlags {
    std::string config;
    std::vector<std::string> sets;
};

void add_input_flags(CLI::App* cmd, RunFlags& f, std::vector<std::pair<std::string, std::optional<std::string>>>& slots)
{
    cmd->add_option("-c,--config", f.config, "key = value config file")->check(CLI::ExistingFile);
    const std::vector<std::pair<std::string, std::string>> opts = {
        {"--input-dir", "input_dir"},   {"--stops", "stops"},         {"--tracts", "tracts"},
        {"--hazard-air", "hazard_air"}, {"--hazard-toxic", "hazard_toxic"}, {"--hazard-heat", "hazard_heat"},
    };
    slots.reserve(16);
    for (const auto& [flag, key] : opts) {
        slots.emplace_back(key, std::nullopt);
        cmd->add_option(flag, slots.back().second, "sets " + key);
    }
    cmd->add_option("--set", f.sets, "extra KEY=VALUE settings, applied after the config file");
}

mei::RunConfig build_config(const RunFlags& f,
                            const std::vector<std::pair<std::string, std::optional<std::string>>>& slots)
{
    mei::RunConfig cfg = mei::default_run_config();
    if (!f.config.empty()) mei::load_config_file(cfg, f.config);
    for (const auto& [key, value] : slots) {
        if (value) mei::apply_setting(cfg, key, *value);
    }
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw mei::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        mei::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

int cmd_synth(const mei::WorldConfig& wc, const std::string& out)
{
    const auto world = mei::gen_world(wc);
    mei::write_world(world, out);
    std::cout << "wrote " << world.tracts.size() << " tracts, " << world.stops.size() << " stops to " << out << '\n';
    return 0;
}

int cmd_run(const mei::RunConfig& cfg)
{
    const auto result = mei::run_pipeline(cfg);
    std::cout << "config_hash " << result.config_hash << '\n';
    for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

int cmd_report(const std::string& mei_path, const std::string& tracts_path, const std::string& thresholds,
               double compound)
{
    mei::RunConfig scratch;
    if (!thresholds.empty()) mei::apply_setting(scratch, "curve_thresholds", thresholds);
    const auto& t = scratch.analysis.curve_thresholds;
    if (!std::is_sorted(t.begin(), t.end())) throw mei::ConfigError("thresholds must be ascending");
    if (!(compound >= 0.0 && compound <= 1.0)) throw mei::ConfigError("compound threshold must lie in [0, 1]");

    mei::MeiTable table;
    std::vector<mei::CensusTract> tracts;
    try {
        table = mei::read_mei_file(mei_path);
        tracts = mei::read_tracts_file(tracts_path);
    } catch (const mei::IngestError& e) {
        throw mei::PipelineError("ingest", e.what());
    }
    std::cout << mei::render_summary(table, tracts, t, compound);
    return 0;
}

int cmd_validate(const mei::RunConfig& cfg)
{
    const auto report = mei::validate_inputs(cfg);
    std::cout << report.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mobility-based hazard exposure index engine"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic world with planted truth");
    mei::WorldConfig wc;
    std::string synth_out;
    std::string demographics = std::string(mei::to_string(wc.demographics));
    synth->add_option("-o,--out", synth_out, "output directory (created if missing)")->required();
    synth->add_option("--seed", wc.seed, "random seed");
    synth->add_option("--grid", wc.grid_n, "tracts per side");
    synth->add_option("--county-side", wc.county_side, "tracts per county side");
    synth->add_option("--tract-deg", wc.tract_deg, "tract side in degrees");
    synth->add_option("--autocorr", wc.hazard_autocorr, "hazard smoothing radius in cells");
    synth->add_option("--shared", wc.hazard_shared, "weight of the field shared by all hazards");
    synth->add_option("--alpha", wc.decay_alpha, "distance-decay exponent");
    synth->add_option("--users", wc.users, "number of users");
    synth->add_option("--stops-per-user", wc.stops_per_user, "stops per user");
    synth->add_flag("--archetypes", wc.archetype_mode, "plant the eight exposure archetypes");
    synth->add_option("--archetype-block", wc.archetype_block, "archetype block side in tracts");
    synth->add_option("--demographics", demographics, "uniform | independent | planted");

    // run
    auto* run = app.add_subcommand("run", "run the full pipeline and write reports");
    RunFlags run_flags;
    std::vector<std::pair<std::string, std::optional<std::string>>> run_slots;
    add_input_flags(run, run_flags, run_slots);
    std::optional<std::string> run_out, run_threads, run_eps, run_min_pts;
    run->add_option("-o,--out", run_out, "output directory");
    run->add_option("-j,--threads", run_threads, "worker threads (default: MEI_THREADS or all cores)");
    run->add_option("--eps", run_eps, "DBSCAN radius");
    run->add_option("--min-pts", run_min_pts, "DBSCAN minimum neighborhood size");

    // report
    auto* report = app.add_subcommand("report", "summarize a previous run");
    std::string report_mei, report_tracts, report_thresholds;
    double report_compound = 0.05;
    report->add_option("--mei", report_mei, "mei.csv from a run")->required();
    report->add_option("--tracts", report_tracts, "tracts.geojson")->required();
    report->add_option("--thresholds", report_thresholds, "comma-separated latent population thresholds");
    report->add_option("--compound", report_compound, "compound latent threshold");

    // validate
    auto* validate = app.add_subcommand("validate", "parse inputs and report problems without running");
    RunFlags val_flags;
    std::vector<std::pair<std::string, std::optional<std::string>>> val_slots;
    add_input_flags(validate, val_flags, val_slots);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (synth->parsed()) {
            auto mode = mei::parse_demographic_mode(demographics);
            if (!mode) throw mei::ConfigError("unknown demographics mode '" + demographics + "'");
            wc.demographics = *mode;
            return cmd_synth(wc, synth_out);
        }
        if (run->parsed()) {
            auto cfg = build_config(run_flags, run_slots);
            if (run_out) mei::apply_setting(cfg, "outdir", *run_out);
            if (run_threads) mei::apply_setting(cfg, "threads", *run_threads);
            if (run_eps) mei::apply_setting(cfg, "eps", *run_eps);
            if (run_min_pts) mei::apply_setting(cfg, "min_pts", *run_min_pts);
            return cmd_run(cfg);
        }
        if (report->parsed()) return cmd_report(report_mei, report_tracts, report_thresholds, report_compound);
        if (validate->parsed()) return cmd_validate(build_config(val_flags, val_slots));
    } catch (const mei::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const mei::PipelineError& e) {
        std::cerr << "error in stage " << e.what() << '\n';
        return kExitRuntime;
    } catch (const mei::OutputError& e) {
        std::cerr << "error in stage write: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
