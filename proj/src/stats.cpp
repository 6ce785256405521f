#include "mei/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mei {

namespace {

constexpr double kSignificance = 0.01;

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h;
}

// `one_minus_x` is passed separately so callers can supply it without cancellation.
double incomplete_beta_split(double a, double b, double x, double one_minus_x)
{
    if (x <= 0.0) return 0.0;
    if (one_minus_x <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log(one_minus_x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, one_minus_x) / b;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // sample variance (n - 1)
    std::size_t n = 0;
};

Moments moments(std::span<const double> v)
{
    Moments m;
    m.n = v.size();
    if (m.n == 0) return m;
    // A constant sample must come out with zero variance; summing would
    // leave rounding residue in the mean.
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
        m.mean = v.front();
        return m;
    }
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(m.n);
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.var = m.n > 1 ? ss / static_cast<double>(m.n - 1) : 0.0;
    return m;
}

std::optional<std::string> t_test_precondition(const Moments& a, const Moments& b)
{
    if (a.n < 2 || b.n < 2) return "each sample needs at least 2 values";
    if (a.var == 0.0 && b.var == 0.0) return "both samples have zero variance";
    return std::nullopt;
}

TTestResult finish(const Moments& a, const Moments& b, double se, double df)
{
    TTestResult r;
    r.mean_a = a.mean;
    r.mean_b = b.mean;
    r.t = (a.mean - b.mean) / se;
    r.df = df;
    r.p = student_t_two_sided_p(r.t, df);
    r.significant_01 = r.p < kSignificance;
    return r;
}

}  // namespace

double incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return incomplete_beta_split(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df)
{
    if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    // p = I_{df/(df+t^2)}(df/2, 1/2)
    const double x = df / (df + t2);
    const double one_minus_x = t2 / (df + t2);
    return std::clamp(incomplete_beta_split(0.5 * df, 0.5, x, one_minus_x), 0.0, 1.0);
}

Checked<TTestResult> welch_t_test(std::span<const double> a, std::span<const double> b)
{
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (auto why = t_test_precondition(ma, mb)) return Checked<TTestResult>::fail(*why);
    const double va = ma.var / static_cast<double>(ma.n);
    const double vb = mb.var / static_cast<double>(mb.n);
    const double se2 = va + vb;
    const double df = se2 * se2 / (va * va / static_cast<double>(ma.n - 1) + vb * vb / static_cast<double>(mb.n - 1));
    return {finish(ma, mb, std::sqrt(se2), df), {}};
}

Checked<TTestResult> pooled_t_test(std::span<const double> a, std::span<const double> b)
{
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (auto why = t_test_precondition(ma, mb)) return Checked<TTestResult>::fail(*why);
    const double df = static_cast<double>(ma.n + mb.n - 2);
    const double sp2 = (static_cast<double>(ma.n - 1) * ma.var + static_cast<double>(mb.n - 1) * mb.var) / df;
    const double se = std::sqrt(sp2 * (1.0 / static_cast<double>(ma.n) + 1.0 / static_cast<double>(mb.n)));
    return {finish(ma, mb, se, df), {}};
}

Checked<TTestResult> t_test(std::span<const double> a, std::span<const double> b, TTestVariant v)
{
    return v == TTestVariant::welch ? welch_t_test(a, b) : pooled_t_test(a, b);
}

Checked<CorrelationResult> pearson(std::span<const double> x, std::span<const double> y)
{
    using R = Checked<CorrelationResult>;
    if (x.size() != y.size()) return R::fail("inputs differ in length");
    if (x.size() < 3) return R::fail("need at least 3 pairs");
    const Moments mx = moments(x);
    const Moments my = moments(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx.mean;
        const double dy = y[i] - my.mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return R::fail("constant input");

    CorrelationResult res;
    res.n = x.size();
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(res.n - 2);
    const double one_minus_r2 = 1.0 - res.r * res.r;
    if (one_minus_r2 <= 0.0) {
        res.p = 0.0;
    } else {
        res.p = student_t_two_sided_p(res.r * std::sqrt(df / one_minus_r2), df);
    }
    res.significant_01 = res.p < kSignificance;
    return {res, {}};
}

std::vector<HazardPairCorrelation> hazard_correlations(const MeiTable& table)
{
    PerHazard<std::vector<double>> cols;
    for (const auto& row : table.rows) {
        if (!row.all_defined()) continue;
        for (std::size_t h = 0; h < kHazardCount; ++h) cols[h].push_back(*row.mei[h]);
    }
    std::vector<HazardPairCorrelation> out;
    for (std::size_t i = 0; i < kHazardCount; ++i) {
        for (std::size_t j = i + 1; j < kHazardCount; ++j) {
            out.push_back({kHazards[i], kHazards[j], pearson(cols[i], cols[j])});
        }
    }
    return out;
}

std::string_view to_string(DisparityScope s)
{
    switch (s) {
        case DisparityScope::air_pollution: return "air_pollution";
        case DisparityScope::toxic: return "toxic";
        case DisparityScope::heat: return "heat";
        case DisparityScope::compound: return "compound";
    }
    return "unknown";
}

std::string_view to_string(Indicator i)
{
    return i == Indicator::poverty200 ? "pct_below_poverty200" : "pct_minority";
}

namespace {

struct TractSample {
    const MeiRow* row;
    const CensusTract* tract;
};

double indicator_value(const CensusTract& t, Indicator ind)
{
    return ind == Indicator::poverty200 ? t.pct_below_poverty200 : t.pct_minority;
}

bool in_class(const MeiRow& row, DisparityScope scope, RegionClass cls)
{
    if (scope == DisparityScope::compound) {
        return std::all_of(row.region.begin(), row.region.end(), [cls](RegionClass c) { return c == cls; });
    }
    return row.region[static_cast<std::size_t>(scope)] == cls;
}

std::optional<double> weighted_mean(const std::vector<TractSample>& samples, Indicator ind)
{
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        num += static_cast<double>(s.tract->population) * indicator_value(*s.tract, ind);
        den += static_cast<double>(s.tract->population);
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

}  // namespace

std::vector<DisparityCell> disparity_table(const MeiTable& table, std::span<const CensusTract> tracts,
                                           TTestVariant variant)
{
    std::map<std::string_view, const CensusTract*> by_geoid;
    for (const auto& t : tracts) by_geoid.emplace(t.geoid, &t);

    std::vector<TractSample> all;
    for (const auto& row : table.rows) {
        if (row.excluded()) continue;
        auto it = by_geoid.find(row.geoid);
        if (it == by_geoid.end()) continue;
        all.push_back({&row, it->second});
    }

    std::vector<DisparityCell> cells;
    for (auto scope : {DisparityScope::air_pollution, DisparityScope::toxic, DisparityScope::heat,
                       DisparityScope::compound}) {
        for (auto cls : {RegionClass::direct, RegionClass::latent}) {
            std::vector<TractSample> members;
            for (const auto& s : all) {
                if (in_class(*s.row, scope, cls)) members.push_back(s);
            }
            for (auto ind : {Indicator::poverty200, Indicator::minority}) {
                DisparityCell cell;
                cell.scope = scope;
                cell.region = cls;
                cell.indicator = ind;
                cell.n_class = members.size();
                cell.n_all = all.size();

                std::vector<double> class_vals, all_vals;
                for (const auto& s : members) class_vals.push_back(indicator_value(*s.tract, ind));
                for (const auto& s : all) all_vals.push_back(indicator_value(*s.tract, ind));
                if (!class_vals.empty()) cell.class_mean = moments(class_vals).mean;
                cell.all_mean = moments(all_vals).mean;
                cell.class_mean_weighted = weighted_mean(members, ind);
                cell.all_mean_weighted = weighted_mean(all, ind);
                if (class_vals.size() < 2) {
                    cell.test = Checked<TTestResult>::fail("class has fewer than 2 tracts");
                } else {
                    cell.test = t_test(class_vals, all_vals, variant);
                }
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

CsvTable scatter_export(const MeiTable& table, std::span<const CensusTract> tracts)
{
    CsvTable csv;
    csv.header = {"geoid", "pct_poverty200", "mei_air", "mei_toxic", "mei_heat", "pct_minority", "population"};
    std::vector<const CensusTract*> sorted;
    for (const auto& t : tracts) sorted.push_back(&t);
    std::sort(sorted.begin(), sorted.end(),
              [](const CensusTract* a, const CensusTract* b) { return a->geoid < b->geoid; });
    for (const auto* t : sorted) {
        const MeiRow* row = table.find(t->geoid);
        std::vector<std::string> cells{t->geoid, format_fixed6(t->pct_below_poverty200)};
        for (std::size_t h = 0; h < kHazardCount; ++h) {
            cells.push_back(row && row->mei[h] ? format_fixed6(*row->mei[h]) : std::string());
        }
        cells.push_back(format_fixed6(t->pct_minority));
        cells.push_back(std::to_string(t->population));
        csv.rows.push_back(std::move(cells));
    }
    return csv;
}

}  // namespace mei
