// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "fixtures.hpp"
#include "oracle/stats_table.hpp"
#include "oracles.hpp"

#include "mei/cluster.hpp"
#include "mei/exposure.hpp"
#include "mei/geoindex.hpp"
#include "mei/hazardclass.hpp"
#include "mei/io.hpp"
#include "mei/pipeline.hpp"
#include "mei/stats.hpp"
#include "mei/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace mei;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kMeiTol = 1e-12;
constexpr double kPTol = 1e-9;
constexpr double kPearsonTol = 1e-12;
constexpr double kAlpha = 0.01;
constexpr double kDirectMin = 0.6;
constexpr double kLatentMax = 0.2;
constexpr double kConvergenceTol = 0.02;

constexpr double kLimit1 = 1.0;
constexpr double kLimit2 = 10.0;
constexpr double kLimit3 = 30.0;
constexpr double kLimit5 = 60.0;
constexpr double kLimit9 = 60.0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            if (pass) detail = what;
            pass = false;
        }
    }
};

int failures = 0;

void criterion(int n, const std::function<Outcome()>& body, double limit_s = 0.0)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0 && secs >= limit_s) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("over time limit");
    }
    if (!o.pass) ++failures;
    char timing[64];
    if (limit_s > 0.0) {
        std::snprintf(timing, sizeof timing, "%.2fs, limit %.0fs", secs, limit_s);
    } else {
        std::snprintf(timing, sizeof timing, "%.2fs", secs);
    }
    std::printf("criterion %d: %s (%s) %s\n", n, o.pass ? "PASS" : "FAIL", timing, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::array<std::map<std::string, bool>, 3> mask_maps(const HazardMasks& masks)
{
    std::array<std::map<std::string, bool>, 3> out;
    for (std::size_t h = 0; h < 3; ++h) out[h] = masks[h].mask;
    return out;
}

// ---- 1 ----

Outcome exposure_oracle()
{
    WorldConfig wc;
    wc.seed = 11;
    wc.grid_n = 6;
    wc.users = 45;
    wc.stops_per_user = 20;
    const auto w = gen_world(wc);
    Outcome o;
    o.require(w.stops.size() <= 1000, "world too large");
    const auto an = analyze({w.stops, w.tracts, w.hazards}, AnalysisOptions{});
    const auto ref = oracle::reference_exposure(w.stops, an.homes.assignments, w.tracts, mask_maps(an.masks));
    std::size_t compared = 0;
    double worst = 0.0;
    for (const auto& row : an.table.rows) {
        const auto it = ref.find(row.geoid);
        if (it == ref.end() || it->second.tdt == 0) {
            o.require(row.excluded(), "tract without resident dwell has an MEI: " + row.geoid);
            continue;
        }
        for (std::size_t h = 0; h < 3; ++h) {
            const double expect = static_cast<double>(it->second.hdt[h]) / static_cast<double>(it->second.tdt);
            o.require(row.mei[h].has_value(), "missing MEI: " + row.geoid);
            if (!row.mei[h]) continue;
            worst = std::max(worst, std::abs(*row.mei[h] - expect));
            ++compared;
        }
    }
    o.require(compared > 0, "nothing compared");
    o.require(worst <= kMeiTol, fmt("max |dMEI| %.3g", worst));
    if (o.pass) o.detail = std::to_string(w.stops.size()) + " stops, " + std::to_string(compared) + " values, max |dMEI| " + fmt("%.3g", worst);
    return o;
}

// ---- 2 ----

Outcome spatial_join_oracle()
{
    const auto tracts = fixture::irregular_tracts();
    const TractIndex index(tracts, 0.7);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> x(-0.5, 11.5), y(-0.5, 9.5);
    int disagreements = 0, inside = 0;
    for (int i = 0; i < 10000; ++i) {
        const double px = x(rng), py = y(rng);
        const auto got = index.locate_geoid(px, py);
        const auto want = oracle::scan_locate(tracts, px, py);
        if (got != want) ++disagreements;
        if (want) ++inside;
    }
    Outcome o;
    o.require(tracts.size() == 100, "fixture is not 100 tracts");
    o.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
    if (o.pass) o.detail = "10000 points, " + std::to_string(inside) + " inside, 0 disagreements";
    return o;
}

// ---- 3 ----

std::vector<ClusterPoint> blobs(std::size_t n, std::uint64_t seed, int centres, double spread)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::normal_distribution<double> g(0, spread);
    std::vector<MeiTriple> c(static_cast<std::size_t>(centres));
    for (auto& m : c) m = {u(rng), u(rng), u(rng)};
    std::vector<ClusterPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        MeiTriple x;
        if (i % 7 == 0) {
            x = {u(rng), u(rng), u(rng)};
        } else {
            const auto& m = c[i % c.size()];
            for (int k = 0; k < 3; ++k) x[k] = std::clamp(m[k] + g(rng), 0.0, 1.0);
        }
        char id[32];
        std::snprintf(id, sizeof id, "48001%06zu", i);
        pts.push_back({id, x});
    }
    return pts;
}

Outcome dbscan_oracle()
{
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> size(200, 2000), centres(2, 8), mp(3, 12);
    std::uniform_real_distribution<double> spread(0.01, 0.06), eps(0.02, 0.12);
    Outcome o;
    int clusters = 0;
    for (int instance = 0; instance < 20; ++instance) {
        const auto pts = blobs(static_cast<std::size_t>(size(rng)), rng(), centres(rng), spread(rng));
        const ClusterConfig cfg{eps(rng), mp(rng)};
        const auto got = dbscan(pts, cfg);
        std::vector<MeiTriple> xs;
        for (const auto& p : pts) xs.push_back(p.x);
        const auto ref = oracle::reference_dbscan(xs, cfg.eps, cfg.min_pts);
        o.require(got.core == ref.core, "core flags differ on instance " + std::to_string(instance));
        o.require(oracle::canonical_labels(got.labels) == oracle::canonical_labels(ref.labels),
                  "labels differ on instance " + std::to_string(instance));
        clusters += got.cluster_count;
    }
    if (o.pass) o.detail = "20 instances, " + std::to_string(clusters) + " clusters in total";
    return o;
}

// ---- 4 ----

Outcome stats_oracle()
{
    Outcome o;
    o.require(oracle::kWelchTable.size() >= 10, "table has fewer than 10 cases");
    double worst_p = 0.0;
    for (const auto& c : oracle::kWelchTable) {
        const auto r = welch_t_test(c.a, c.b);
        o.require(bool(r), "welch failed: " + r.error);
        if (!r) continue;
        worst_p = std::max(worst_p, std::abs(r->p - c.p));
        o.require(std::abs(r->t - c.t) <= 1e-9 * std::max(1.0, std::abs(c.t)), "t mismatch");
    }
    o.require(worst_p < kPTol, fmt("max |dp| %.3g", worst_p));

    const auto pr = pearson(oracle::kPearsonX, oracle::kPearsonY);
    o.require(bool(pr), "pearson failed");
    double dr = 1.0;
    if (pr) {
        dr = std::max(std::abs(pr->r - oracle::pearson_sums(oracle::kPearsonX, oracle::kPearsonY)),
                      std::abs(pr->r - oracle::kPearsonR));
    }
    o.require(dr <= kPearsonTol, fmt("|dr| %.3g", dr));

    const std::vector<double> same{0.31, 0.12, 0.77, 0.45, 0.5, 0.09};
    for (auto v : {TTestVariant::welch, TTestVariant::pooled}) {
        const auto r = t_test(same, same, v);
        o.require(r && r->t == 0.0 && r->p == 1.0, "identical samples not t = 0, p = 1");
    }
    if (o.pass) {
        o.detail = std::to_string(oracle::kWelchTable.size()) + " welch cases, max |dp| " + fmt("%.3g", worst_p) +
                   ", pearson |dr| " + fmt("%.3g", dr);
    }
    return o;
}

// ---- 5 ----

Outcome bimodal()
{
    WorldConfig wc;
    wc.seed = 1;
    wc.grid_n = 20;
    wc.hazard_autocorr = 2;
    wc.decay_alpha = 2.0;
    wc.users = 2000;
    wc.stops_per_user = 20;
    const auto w = gen_world(wc);
    const auto an = analyze({w.stops, w.tracts, w.hazards}, AnalysisOptions{});
    Outcome o;
    std::string summary;
    for (HazardType h : kHazards) {
        const auto& s = an.classes[index_of(h)];
        const auto& d = s[static_cast<std::size_t>(RegionClass::direct)];
        const auto& l = s[static_cast<std::size_t>(RegionClass::latent)];
        const std::string name(short_name(h));
        o.require(d.tracts > 0 && l.tracts > 0, name + ": empty region class");
        o.require(d.mean_mei > kDirectMin, name + fmt(": direct mean MEI %.3f", d.mean_mei));
        o.require(l.mean_mei < kLatentMax, name + fmt(": latent mean MEI %.3f", l.mean_mei));
        o.require(d.mean_nonhome_share > l.mean_nonhome_share,
                  name + fmt(": non-home share direct %.3f <= latent %.3f", d.mean_nonhome_share, l.mean_nonhome_share));
        summary += (summary.empty() ? "" : "; ") + name +
                   fmt(" direct %.3f latent %.3f", d.mean_mei, l.mean_mei) +
                   fmt(" nonhome %.3f/%.3f", d.mean_nonhome_share, l.mean_nonhome_share);
    }
    if (o.pass) o.detail = summary;
    return o;
}

// ---- 6 ----

std::vector<DisparityCell> disparity_for(DemographicMode mode)
{
    WorldConfig wc;
    wc.seed = 1;
    wc.grid_n = 30;
    wc.county_side = 30;
    wc.hazard_autocorr = 2;
    wc.hazard_shared = 0.8;
    wc.decay_alpha = 8.0;
    wc.users = 9000;
    wc.stops_per_user = 40;
    wc.demographics = mode;
    const auto w = gen_world(wc);
    AnalysisOptions opts;
    opts.air_threshold = 0.8;
    opts.toxic_threshold = 0.8;
    return analyze({w.stops, w.tracts, w.hazards}, opts).disparity;
}

Outcome disparity_direction()
{
    Outcome o;
    double worst = 0.0;
    for (const auto& c : disparity_for(DemographicMode::planted)) {
        const std::string name = std::string(to_string(c.scope)) + "/" + std::string(to_string(c.region)) + "/" +
                                 std::string(to_string(c.indicator));
        o.require(bool(c.test), name + ": no test");
        if (!c.test) continue;
        o.require(c.class_mean && *c.class_mean > c.all_mean, name + ": class mean not above all-tract mean");
        o.require(c.test->p < kAlpha, name + fmt(": p = %.3g", c.test->p));
        worst = std::max(worst, c.test->p);
    }
    int significant = 0;
    for (const auto& c : disparity_for(DemographicMode::uniform)) {
        if (c.test && c.test->significant_01) ++significant;
    }
    o.require(significant == 0, std::to_string(significant) + " significant cells with uniform demographics");
    if (o.pass) o.detail = "planted: 16 cells, max p " + fmt("%.3g", worst) + "; uniform: 0 significant";
    return o;
}

// ---- 7 ----

Outcome convergence()
{
    WorldConfig wc;
    wc.seed = 7;
    wc.grid_n = 10;
    wc.hazard_autocorr = 2;
    wc.users = 500;
    wc.stops_per_user = 2000;
    const auto w = gen_world(wc);
    const auto truth = planted_truth(w);
    const auto an = analyze({w.stops, w.tracts, w.hazards}, AnalysisOptions{});
    Outcome o;
    o.require(an.homes.assignments == truth.homes, "inferred homes differ from planted homes");
    double worst = 0.0;
    std::size_t compared = 0;
    for (const auto& row : an.table.rows) {
        if (row.excluded()) continue;
        const auto& expect = truth.expected_mei.at(row.geoid);
        for (std::size_t h = 0; h < 3; ++h) worst = std::max(worst, std::abs(*row.mei[h] - expect[h]));
        ++compared;
    }
    o.require(compared > 0, "no tracts compared");
    o.require(worst <= kConvergenceTol, fmt("max |MEI - expected| %.4f", worst));
    if (o.pass) o.detail = std::to_string(compared) + " tracts, max |MEI - expected| " + fmt("%.4f", worst);
    return o;
}

// ---- 8 ----

nlohmann::json without_hash(const fs::path& p)
{
    auto j = nlohmann::json::parse(fixture::slurp(p));
    j.erase("config_hash");
    return j;
}

std::vector<fs::path> outputs(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism()
{
    const auto dir = fixture::temp_dir("acceptance_det");
    WorldConfig wc;
    wc.seed = 8;
    wc.grid_n = 16;
    wc.hazard_autocorr = 2;
    wc.users = 1500;
    wc.stops_per_user = 30;
    auto w = gen_world(wc);
    write_world(w, dir / "in");

    RunConfig cfg = default_run_config();
    apply_setting(cfg, "input_dir", (dir / "in").string());
    cfg.threads = 1;
    cfg.outdir = dir / "t1";
    run_pipeline(cfg);
    cfg.threads = 8;
    cfg.outdir = dir / "t8";
    run_pipeline(cfg);

    Outcome o;
    const auto names = outputs(dir / "t1");
    o.require(names == outputs(dir / "t8"), "different file sets for 1 and 8 threads");
    o.require(fixture::slurp(dir / "t1" / "mei.csv") == fixture::slurp(dir / "t8" / "mei.csv"), "mei.csv differs by thread count");
    for (const auto& n : names) {
        o.require(fixture::slurp(dir / "t1" / n) == fixture::slurp(dir / "t8" / n), n.string() + " differs by thread count");
    }

    std::mt19937_64 rng(88);
    std::shuffle(w.stops.begin(), w.stops.end(), rng);
    {
        std::ofstream out(dir / "in" / "stops.csv", std::ios::binary);
        write_stops(out, w.stops);
    }
    cfg.threads = 1;
    cfg.outdir = dir / "shuffled";
    run_pipeline(cfg);
    o.require(names == outputs(dir / "shuffled"), "different file sets after shuffle");
    for (const auto& n : names) {
        if (n.extension() == ".csv") {
            o.require(fixture::slurp(dir / "t1" / n) == fixture::slurp(dir / "shuffled" / n), n.string() + " differs after shuffle");
        } else {
            // JSON carries a hash of the input bytes, which a shuffle changes.
            o.require(without_hash(dir / "t1" / n) == without_hash(dir / "shuffled" / n),
                      n.string() + " differs after shuffle");
        }
    }
    fs::remove_all(dir);
    if (o.pass) o.detail = std::to_string(names.size()) + " files identical for 1/8 threads and shuffled stops";
    return o;
}

// ---- 9 ----

Outcome performance(double& elapsed)
{
    const auto dir = fixture::temp_dir("acceptance_perf");
    WorldConfig wc;
    wc.seed = 9;
    wc.grid_n = 32;
    wc.county_side = 8;
    wc.hazard_autocorr = 2;
    wc.users = 10000;
    wc.stops_per_user = 100;
    write_world(gen_world(wc), dir / "in");

    RunConfig cfg = default_run_config();
    apply_setting(cfg, "input_dir", (dir / "in").string());
    cfg.threads = 1;
    cfg.outdir = dir / "out";
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_pipeline(cfg);
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Outcome o;
    const std::size_t accepted = r.meta["inputs"]["stops"]["rows_accepted"].get<std::size_t>();
    o.require(accepted == 1000000, "expected 1000000 stops, got " + std::to_string(accepted));
    o.require(r.meta["tracts"]["total"].get<std::size_t>() == 1024, "expected 1024 tracts");
    o.require(elapsed < kLimit9, fmt("run took %.1fs", elapsed));
    fs::remove_all(dir);
    if (o.pass) o.detail = "1000000 stops, 1024 tracts, 1 thread, pipeline " + fmt("%.2fs", elapsed);
    return o;
}

// ---- 10 ----

Outcome monotonicity()
{
    WorldConfig wc;
    wc.seed = 10;
    wc.grid_n = 15;
    wc.hazard_autocorr = 2;
    wc.users = 1200;
    wc.stops_per_user = 30;
    const auto w = gen_world(wc);
    AnalysisOptions opts;
    opts.curve_thresholds.clear();
    for (int i = 0; i <= 50; ++i) opts.curve_thresholds.push_back(0.02 * i);
    const auto an = analyze({w.stops, w.tracts, w.hazards}, opts);
    Outcome o;

    for (const auto& curve : an.curves) {
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            o.require(curve.points[i].second <= curve.points[i - 1].second, "population curve increases");
        }
    }

    for (std::size_t h = 0; h < 2; ++h) {
        HazardLayer prev = classify_percentile(w.hazards[h], 0.0);
        for (int i = 1; i <= 100; ++i) {
            const auto cur = classify_percentile(w.hazards[h], 0.01 * i);
            for (const auto& [g, high] : cur.mask) {
                o.require(!high || prev.is_high(g), "percentile mask grows with threshold");
            }
            prev = cur;
        }
    }

    const TractIndex index(w.tracts);
    const auto located = locate_all(index, w.stops);
    const auto base = compute_mei(accumulate(w.stops, located, an.homes, index, an.masks).tracts);
    std::mt19937_64 rng(1010);
    std::bernoulli_distribution add(0.15);
    int enlargements = 0;
    for (int round = 0; round < 5; ++round) {
        HazardMasks bigger = an.masks;
        for (auto& layer : bigger) {
            for (const auto& t : w.tracts) {
                if (add(rng)) layer.mask[t.geoid] = true;
            }
        }
        const auto grown = compute_mei(accumulate(w.stops, located, an.homes, index, bigger).tracts);
        for (std::size_t i = 0; i < base.rows.size(); ++i) {
            for (std::size_t h = 0; h < 3; ++h) {
                if (base.rows[i].mei[h]) o.require(*grown.rows[i].mei[h] >= *base.rows[i].mei[h], "MEI decreased");
            }
        }
        ++enlargements;
    }
    if (o.pass) {
        o.detail = std::to_string(an.curves.size()) + " curves x " + std::to_string(opts.curve_thresholds.size()) +
                   " thresholds, 100 mask thresholds, " + std::to_string(enlargements) + " mask enlargements";
    }
    return o;
}

}  // namespace

int main()
{
    criterion(1, exposure_oracle, kLimit1);
    criterion(2, spatial_join_oracle, kLimit2);
    criterion(3, dbscan_oracle, kLimit3);
    criterion(4, stats_oracle);
    criterion(5, bimodal, kLimit5);
    criterion(6, disparity_direction);
    criterion(7, convergence);
    criterion(8, determinism);
    double pipeline_s = 0.0;
    criterion(9, [&] { return performance(pipeline_s); });
    criterion(10, monotonicity);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
