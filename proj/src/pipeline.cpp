#include "mei/pipeline.hpp"

#include "mei/error.hpp"
#include "mei/geoindex.hpp"
#include "mei/hazardclass.hpp"
#include "mei/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace mei {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> AnalysisOptions::default_curve_thresholds()
{
    std::vector<double> t;
    for (int i = 0; i <= 10; ++i) t.push_back(i * 0.05);
    return t;
}

unsigned default_thread_count()
{
    if (const char* env = std::getenv("MEI_THREADS")) {
        unsigned v = 0;
        const std::string_view s(env);
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig default_run_config()
{
    RunConfig cfg;
    cfg.threads = default_thread_count();
    return cfg;
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(std::string_view key, std::string_view v)
{
    double x = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
        throw ConfigError(std::string(key) + ": not a number: '" + std::string(v) + "'");
    }
    return x;
}

int parse_int(std::string_view key, std::string_view v)
{
    int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError(std::string(key) + ": not an integer: '" + std::string(v) + "'");
    }
    return x;
}

bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

fs::path resolve(std::string_view v, const fs::path& base)
{
    fs::path p{std::string(v)};
    if (p.is_relative() && !base.empty()) p = base / p;
    return p;
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key_in, std::string_view value_in, const fs::path& base)
{
    const std::string key = trim(key_in);
    const std::string value = trim(value_in);
    auto& a = cfg.analysis;
    if (key == "input_dir") {
        const fs::path dir = resolve(value, base);
        cfg.stops = dir / "stops.csv";
        cfg.tracts = dir / "tracts.geojson";
        for (auto h : kHazards) cfg.hazards[index_of(h)] = dir / ("hazard_" + std::string(short_name(h)) + ".csv");
    } else if (key == "stops") {
        cfg.stops = resolve(value, base);
    } else if (key == "tracts") {
        cfg.tracts = resolve(value, base);
    } else if (key == "hazard_air") {
        cfg.hazards[0] = resolve(value, base);
    } else if (key == "hazard_toxic") {
        cfg.hazards[1] = resolve(value, base);
    } else if (key == "hazard_heat") {
        cfg.hazards[2] = resolve(value, base);
    } else if (key == "outdir") {
        cfg.outdir = resolve(value, base);
    } else if (key == "threads") {
        const int t = parse_int(key, value);
        if (t < 1) throw ConfigError("threads must be at least 1");
        cfg.threads = static_cast<unsigned>(t);
    } else if (key == "air_threshold") {
        a.air_threshold = parse_number(key, value);
    } else if (key == "toxic_threshold") {
        a.toxic_threshold = parse_number(key, value);
    } else if (key == "heat_quartile") {
        a.heat_quartile = parse_bool(key, value);
    } else if (key == "heat_min_days") {
        a.heat_min_days = parse_number(key, value);
    } else if (key == "night_start") {
        a.home.night_start_hour = parse_int(key, value);
    } else if (key == "night_end") {
        a.home.night_end_hour = parse_int(key, value);
    } else if (key == "min_nights") {
        a.home.min_nights = parse_int(key, value);
    } else if (key == "eps") {
        a.cluster.eps = parse_number(key, value);
    } else if (key == "min_pts") {
        a.cluster.min_pts = parse_int(key, value);
    } else if (key == "curve_thresholds") {
        a.curve_thresholds.clear();
        std::string_view rest = value;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string item = trim(rest.substr(0, comma));
            if (item.empty()) throw ConfigError("curve_thresholds: empty entry");
            a.curve_thresholds.push_back(parse_number(key, item));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    } else if (key == "compound_threshold") {
        a.compound_threshold = parse_number(key, value);
    } else if (key == "ttest") {
        if (value == "welch") {
            a.ttest = TTestVariant::welch;
        } else if (value == "pooled") {
            a.ttest = TTestVariant::pooled;
        } else {
            throw ConfigError("ttest must be welch or pooled");
        }
    } else if (key == "cell_size") {
        a.cell_size_deg = parse_number(key, value);
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

void load_config_file(RunConfig& cfg, const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    const fs::path base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_setting(cfg, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1), base);
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void check_run_config(const RunConfig& cfg, bool need_outdir)
{
    auto need_file = [](const fs::path& p, std::string_view what) {
        if (p.empty()) throw ConfigError(std::string(what) + " path is not set");
        if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " file not found: " + p.string());
    };
    need_file(cfg.stops, "stops");
    need_file(cfg.tracts, "tracts");
    for (auto h : kHazards) need_file(cfg.hazards[index_of(h)], "hazard_" + std::string(short_name(h)));
    if (need_outdir && cfg.outdir.empty()) throw ConfigError("output directory is not set");
    if (cfg.threads < 1) throw ConfigError("threads must be at least 1");

    const auto& a = cfg.analysis;
    for (double t : {a.air_threshold, a.toxic_threshold}) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("percentile thresholds must lie in [0, 1]");
    }
    if (!a.heat_quartile && !(a.heat_min_days >= 0.0)) throw ConfigError("heat_min_days must be non-negative");
    check_home_params(a.home);
    check_cluster_config(a.cluster);
    if (!std::is_sorted(a.curve_thresholds.begin(), a.curve_thresholds.end())) {
        throw ConfigError("curve_thresholds must be ascending");
    }
    for (double t : a.curve_thresholds) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("curve_thresholds must lie in [0, 1]");
    }
    if (!(a.compound_threshold >= 0.0 && a.compound_threshold <= 1.0)) {
        throw ConfigError("compound_threshold must lie in [0, 1]");
    }
    if (!(a.cell_size_deg > 0.0)) throw ConfigError("cell_size must be positive");
}

std::string canonical_config(const RunConfig& cfg)
{
    const auto& a = cfg.analysis;
    std::ostringstream out;
    out << "air_threshold=" << format_shortest(a.air_threshold) << '\n'
        << "cell_size=" << format_shortest(a.cell_size_deg) << '\n'
        << "compound_threshold=" << format_shortest(a.compound_threshold) << '\n'
        << "curve_thresholds=";
    for (std::size_t i = 0; i < a.curve_thresholds.size(); ++i) {
        out << (i ? "," : "") << format_shortest(a.curve_thresholds[i]);
    }
    out << '\n'
        << "eps=" << format_shortest(a.cluster.eps) << '\n'
        << "heat_min_days=" << format_shortest(a.heat_min_days) << '\n'
        << "heat_quartile=" << (a.heat_quartile ? "true" : "false") << '\n'
        << "min_nights=" << a.home.min_nights << '\n'
        << "min_pts=" << a.cluster.min_pts << '\n'
        << "night_end=" << a.home.night_end_hour << '\n'
        << "night_start=" << a.home.night_start_hour << '\n'
        << "toxic_threshold=" << format_shortest(a.toxic_threshold) << '\n'
        << "ttest=" << (a.ttest == TTestVariant::welch ? "welch" : "pooled") << '\n';
    return out.str();
}

namespace {

std::uint64_t hash_file(const fs::path& p, std::uint64_t h)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::string buf(1 << 16, '\0');
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

}  // namespace

std::string config_hash(const RunConfig& cfg)
{
    std::uint64_t h = fnv1a64(canonical_config(cfg));
    h = hash_file(cfg.stops, h);
    h = hash_file(cfg.tracts, h);
    for (const auto& p : cfg.hazards) h = hash_file(p, h);
    return hex64(h);
}

HazardMasks classify_hazards(const PerHazard<HazardLayer>& layers, std::span<const CensusTract> tracts,
                             const AnalysisOptions& opts, std::vector<std::string>* warnings)
{
    HazardMasks masks;
    masks[0] = classify_percentile(layers[0], opts.air_threshold);
    masks[1] = classify_percentile(layers[1], opts.toxic_threshold);
    if (opts.heat_quartile) {
        auto heat = classify_heat_quartile(layers[2], tracts);
        masks[2] = std::move(heat.layer);
        if (warnings) warnings->insert(warnings->end(), heat.warnings.begin(), heat.warnings.end());
    } else {
        masks[2] = classify_heat_absolute(layers[2], opts.heat_min_days);
    }
    return masks;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn())
{
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

}  // namespace

Analysis analyze(const PipelineInputs& in, const AnalysisOptions& opts, unsigned threads)
{
    Analysis out;
    const TractIndex index = stage("geoindex", [&] { return TractIndex(in.tracts, opts.cell_size_deg); });
    const auto located = stage("geoindex", [&] { return locate_all(index, in.stops, threads); });

    out.homes = stage("homeloc", [&] { return infer_homes(in.stops, located, index, opts.home, threads); });

    out.masks = stage("hazardclass", [&] { return classify_hazards(in.hazards, in.tracts, opts, &out.warnings); });
    for (std::size_t h = 0; h < kHazardCount; ++h) {
        std::size_t missing = 0;
        for (const auto& g : index.geoids()) missing += in.hazards[h].values.count(g) ? 0 : 1;
        if (missing > 0) {
            out.warnings.push_back(std::string(to_string(kHazards[h])) + ": " + std::to_string(missing) +
                                   " tracts have no hazard value and are treated as not high-hazard");
        }
    }

    stage("exposure", [&] {
        out.accumulation = accumulate(in.stops, located, out.homes, index, out.masks, threads);
        out.table = classify_regions(compute_mei(out.accumulation.tracts), out.masks);
        for (auto h : kHazards) {
            out.curves.push_back(population_curve(out.table, in.tracts, h, opts.curve_thresholds));
        }
        out.compound = compound_latent(out.table, in.tracts, opts.compound_threshold);
        out.classes = summarize_classes(out.table);
    });

    stage("cluster", [&] {
        out.clusters = dbscan(cluster_points(out.table), opts.cluster, threads);
        apply_labels(out.table, out.clusters);
        out.cluster_summary = summarize(out.clusters, out.table);
    });

    stage("stats", [&] {
        out.disparity = disparity_table(out.table, in.tracts, opts.ttest);
        out.correlations = hazard_correlations(out.table);
    });
    return out;
}

IngestResult ingest_inputs(const RunConfig& cfg)
{
    return stage("ingest", [&] {
        IngestResult r;
        auto stops = read_stops_file(cfg.stops);
        r.inputs.stops = std::move(stops.stops);
        r.stops_report = std::move(stops.report);
        r.inputs.tracts = read_tracts_file(cfg.tracts);
        for (auto h : kHazards) {
            auto layer = read_hazard_file(cfg.hazards[index_of(h)], h);
            r.inputs.hazards[index_of(h)] = std::move(layer.layer);
            r.hazard_reports[index_of(h)] = std::move(layer.report);
        }
        return r;
    });
}

namespace {

json report_json(const IngestReport& r)
{
    json rejects = json::array();
    for (const auto& [line, why] : r.first_rejects) rejects.push_back({{"line", line}, {"reason", why}});
    return {{"rows_read", r.rows_read},
            {"rows_accepted", r.rows_accepted},
            {"rows_rejected", r.rows_rejected},
            {"first_rejects", rejects}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_meta(const RunConfig& cfg, const IngestResult& ing, const Analysis& an, const std::string& hash)
{
    json meta;
    meta["config_hash"] = hash;
    json settings = json::object();
    std::istringstream canon(canonical_config(cfg));
    for (std::string line; std::getline(canon, line);) {
        const auto eq = line.find('=');
        settings[line.substr(0, eq)] = line.substr(eq + 1);
    }
    meta["config"] = settings;

    json inputs;
    inputs["stops"] = report_json(ing.stops_report);
    inputs["tracts"] = ing.inputs.tracts.size();
    for (auto h : kHazards) inputs["hazard_" + std::string(short_name(h))] = report_json(ing.hazard_reports[index_of(h)]);
    meta["inputs"] = inputs;

    const auto& d = an.accumulation.diagnostics;
    meta["diagnostics"] = {{"stops_total", d.stops_total},
                           {"stops_ignored", d.stops_ignored},
                           {"users_dropped", d.users_dropped},
                           {"dwell_total_s", d.dwell_total_s},
                           {"dwell_ignored_s", d.dwell_ignored_s},
                           {"dwell_unresolved_s", d.dwell_unresolved_s}};
    meta["homes"] = {{"assigned", an.homes.assignments.size()}, {"unassigned", an.homes.unassigned.size()}};

    json masks;
    for (auto h : kHazards) {
        std::size_t high = 0;
        for (const auto& [_, m] : an.masks[index_of(h)].mask) high += m ? 1 : 0;
        masks[std::string(to_string(h))] = {{"high_tracts", high}};
    }
    meta["masks"] = masks;
    meta["warnings"] = an.warnings;

    std::size_t excluded = 0;
    for (const auto& r : an.table.rows) excluded += r.excluded() ? 1 : 0;
    meta["tracts"] = {{"total", an.table.rows.size()}, {"excluded", excluded}};

    json classes;
    for (auto h : kHazards) {
        json per;
        for (auto c : {RegionClass::direct, RegionClass::latent, RegionClass::none}) {
            const auto& s = an.classes[index_of(h)][static_cast<std::size_t>(c)];
            per[std::string(to_string(c))] = {{"tracts", s.tracts},
                                              {"mean_mei", s.mean_mei},
                                              {"mean_nonhome_share", s.mean_nonhome_share},
                                              {"mean_nonhome_conditional", optional_json(s.mean_nonhome_conditional)}};
        }
        classes[std::string(to_string(h))] = per;
    }
    meta["region_classes"] = classes;

    std::size_t noise = 0;
    for (int l : an.clusters.labels) noise += l == kNoise ? 1 : 0;
    meta["clusters"] = {{"eps", cfg.analysis.cluster.eps},
                        {"min_pts", cfg.analysis.cluster.min_pts},
                        {"points", an.clusters.labels.size()},
                        {"clusters", an.clusters.cluster_count},
                        {"noise", noise}};
    meta["compound_latent"] = {{"threshold", cfg.analysis.compound_threshold},
                               {"tracts", an.compound.geoids},
                               {"population", an.compound.population}};
    return meta;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + p.string());
    out << text;
    if (!out) throw OutputError("write failed for " + p.string());
}

}  // namespace

RunResult run_pipeline(const RunConfig& cfg)
{
    check_run_config(cfg);
    RunResult result;
    result.config_hash = config_hash(cfg);

    const IngestResult ing = ingest_inputs(cfg);
    const Analysis an = analyze(ing.inputs, cfg.analysis, cfg.threads);

    bool created_dir = false;
    try {
        stage("write", [&] {
            if (!fs::exists(cfg.outdir)) created_dir = fs::create_directories(cfg.outdir);
            const json extra = {{"config_hash", result.config_hash}};
            auto emit = [&](const CsvTable& table, const char* name) {
                const fs::path dest = cfg.outdir / name;
                result.files.push_back(dest);
                result.files.push_back(metadata_path(dest));
                write_report(table, dest, result.config_hash, extra);
            };
            emit(mei_table_csv(an.table), "mei.csv");
            emit(clusters_csv(an.clusters, [&] {
                     std::vector<std::string> g;
                     for (const auto& r : an.table.rows) g.push_back(r.geoid);
                     return g;
                 }()),
                 "clusters.csv");
            emit(cluster_summary_csv(an.cluster_summary), "cluster_summary.csv");
            emit(disparity_csv(an.disparity), "disparity.csv");
            emit(correlations_csv(an.correlations), "correlations.csv");
            emit(scatter_export(an.table, ing.inputs.tracts), "scatter.csv");
            emit(curves_csv(an.curves), "curves.csv");

            result.meta = run_meta(cfg, ing, an, result.config_hash);
            const fs::path meta_path = cfg.outdir / "run_meta.json";
            result.files.push_back(meta_path);
            write_text(meta_path, result.meta.dump(2) + "\n");
        });
    } catch (...) {
        std::error_code ec;
        for (const auto& f : result.files) fs::remove(f, ec);
        if (created_dir) fs::remove(cfg.outdir, ec);  // only succeeds if empty
        throw;
    }
    return result;
}

json validate_inputs(const RunConfig& cfg)
{
    check_run_config(cfg, false);
    const IngestResult ing = ingest_inputs(cfg);
    json out;
    out["config_hash"] = config_hash(cfg);
    out["stops"] = report_json(ing.stops_report);
    out["tracts"] = ing.inputs.tracts.size();
    for (auto h : kHazards) out["hazard_" + std::string(short_name(h))] = report_json(ing.hazard_reports[index_of(h)]);

    std::size_t violations = 0;
    for (const auto& s : ing.inputs.stops) violations += validate(s).size();
    for (const auto& t : ing.inputs.tracts) violations += validate(t).size();
    for (const auto& l : ing.inputs.hazards) violations += validate(l).size();
    out["violations"] = violations;

    std::set<std::string> tract_ids;
    for (const auto& t : ing.inputs.tracts) tract_ids.insert(t.geoid);
    json unmatched;
    for (auto h : kHazards) {
        std::size_t n = 0;
        for (const auto& [g, _] : ing.inputs.hazards[index_of(h)].values) n += tract_ids.count(g) ? 0 : 1;
        unmatched[std::string(short_name(h))] = n;
    }
    out["hazard_geoids_without_tract"] = unmatched;
    return out;
}

}  // namespace mei
