#include "mei/report.hpp"

#include <sstream>

namespace mei {

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string(); }

std::string bool_cell(bool b) { return b ? "true" : "false"; }

}  // namespace

CsvTable clusters_csv(const ClusterResult& result, std::span<const std::string> geoids)
{
    const auto labels = result.label_map();
    CsvTable t;
    t.header = {"geoid", "label"};
    for (const auto& g : geoids) {
        auto it = labels.find(g);
        t.rows.push_back({g, it == labels.end() ? std::string() : std::to_string(it->second)});
    }
    return t;
}

CsvTable cluster_summary_csv(std::span<const ClusterSummaryRow> rows)
{
    CsvTable t;
    t.header = {"label", "count", "share", "mean_mei_air", "mean_mei_toxic", "mean_mei_heat"};
    for (const auto& r : rows) {
        t.rows.push_back({std::to_string(r.label), std::to_string(r.count), format_fixed6(r.share),
                          format_fixed6(r.mean_mei[0]), format_fixed6(r.mean_mei[1]), format_fixed6(r.mean_mei[2])});
    }
    return t;
}

CsvTable disparity_csv(std::span<const DisparityCell> cells)
{
    CsvTable t;
    t.header = {"scope", "class", "indicator", "n_class", "n_all", "class_mean", "all_mean",
                "class_mean_popweighted", "all_mean_popweighted", "t", "df", "p", "significant_01", "note"};
    for (const auto& c : cells) {
        std::vector<std::string> row{std::string(to_string(c.scope)), std::string(to_string(c.region)),
                                     std::string(to_string(c.indicator)), std::to_string(c.n_class),
                                     std::to_string(c.n_all), optional_cell(c.class_mean), format_fixed6(c.all_mean),
                                     optional_cell(c.class_mean_weighted), optional_cell(c.all_mean_weighted)};
        if (c.test) {
            row.push_back(format_fixed6(c.test->t));
            row.push_back(format_fixed6(c.test->df));
            row.push_back(format_fixed6(c.test->p));
            row.push_back(bool_cell(c.test->significant_01));
            row.emplace_back();
        } else {
            row.insert(row.end(), {"", "", "", "false", c.test.error});
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable correlations_csv(std::span<const HazardPairCorrelation> pairs)
{
    CsvTable t;
    t.header = {"hazard_a", "hazard_b", "n", "r", "p", "significant_01", "note"};
    for (const auto& p : pairs) {
        std::vector<std::string> row{std::string(to_string(p.a)), std::string(to_string(p.b))};
        if (p.result) {
            row.insert(row.end(), {std::to_string(p.result->n), format_fixed6(p.result->r), format_fixed6(p.result->p),
                                   bool_cell(p.result->significant_01), ""});
        } else {
            row.insert(row.end(), {"", "", "", "false", p.result.error});
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable curves_csv(std::span<const PopulationCurve> curves)
{
    CsvTable t;
    t.header = {"hazard", "threshold", "population"};
    for (const auto& c : curves) {
        for (const auto& [thr, pop] : c.points) {
            t.rows.push_back({std::string(to_string(c.hazard)), format_fixed6(thr), std::to_string(pop)});
        }
    }
    return t;
}

std::string render_summary(const MeiTable& table, std::span<const CensusTract> tracts,
                           std::span<const double> thresholds, double compound_threshold)
{
    std::ostringstream out;
    std::size_t excluded = 0;
    for (const auto& r : table.rows) excluded += r.excluded() ? 1 : 0;
    out << "tracts: " << table.rows.size() << " (excluded: " << excluded << ")\n";

    const auto classes = summarize_classes(table);
    for (std::size_t h = 0; h < kHazardCount; ++h) {
        out << "\n[" << to_string(kHazards[h]) << "]\n";
        for (auto cls : {RegionClass::direct, RegionClass::latent, RegionClass::none}) {
            const auto& s = classes[h][static_cast<std::size_t>(cls)];
            out << to_string(cls) << ": " << s.tracts << " tracts";
            if (s.tracts > 0) {
                out << ", mean_mei " << format_fixed6(s.mean_mei) << ", mean_nonhome_share "
                    << format_fixed6(s.mean_nonhome_share);
                if (s.mean_nonhome_conditional) {
                    out << ", mean_nonhome_conditional " << format_fixed6(*s.mean_nonhome_conditional);
                }
            }
            out << '\n';
        }
        const auto curve = population_curve(table, tracts, kHazards[h], thresholds);
        for (const auto& [thr, pop] : curve.points) {
            out << "latent_population mei>" << format_fixed6(thr) << ": " << pop << '\n';
        }
    }

    const auto compound = compound_latent(table, tracts, compound_threshold);
    out << "\ncompound_latent mei>" << format_fixed6(compound_threshold) << ": " << compound.geoids.size()
        << " tracts, population " << compound.population << '\n';
    return out.str();
}

}  // namespace mei
