#pragma once
// Two-sample t-tests, Pearson correlation, and the demographic disparity table.

#include "mei/io.hpp"
#include "mei/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mei {

/// A statistic or the reason it could not be computed.
template <class T>
struct Checked {
    std::optional<T> value;
    std::string error;

    static Checked fail(std::string why) { return {std::nullopt, std::move(why)}; }
    explicit operator bool() const { return value.has_value(); }
    const T& operator*() const { return *value; }
    const T* operator->() const { return &*value; }
};

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

enum class TTestVariant { welch, pooled };

struct TTestResult {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    bool significant_01 = false;
};

/// Needs >= 2 values per sample and a nonzero variance in at least one.
Checked<TTestResult> welch_t_test(std::span<const double> a, std::span<const double> b);
Checked<TTestResult> pooled_t_test(std::span<const double> a, std::span<const double> b);
Checked<TTestResult> t_test(std::span<const double> a, std::span<const double> b, TTestVariant v);

struct CorrelationResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    bool significant_01 = false;
};

/// Equal lengths >= 3, neither input constant.
Checked<CorrelationResult> pearson(std::span<const double> x, std::span<const double> y);

struct HazardPairCorrelation {
    HazardType a;
    HazardType b;
    Checked<CorrelationResult> result;
};

/// Pearson r for each hazard pair over tracts with all three MEI defined.
std::vector<HazardPairCorrelation> hazard_correlations(const MeiTable& table);

enum class DisparityScope { air_pollution, toxic, heat, compound };
enum class Indicator { poverty200, minority };

std::string_view to_string(DisparityScope s);
std::string_view to_string(Indicator i);

struct DisparityCell {
    DisparityScope scope = DisparityScope::air_pollution;
    RegionClass region = RegionClass::direct;
    Indicator indicator = Indicator::poverty200;
    std::size_t n_class = 0;
    std::size_t n_all = 0;
    std::optional<double> class_mean;
    double all_mean = 0.0;
    std::optional<double> class_mean_weighted;
    std::optional<double> all_mean_weighted;
    Checked<TTestResult> test;
};

/// For each scope (three hazards, then compound) x {direct, latent} x
/// {poverty, minority}: unweighted and population-weighted tract means of the
/// class against all non-excluded tracts, with a t-test of class vs all.
/// Compound classes require the same region class for all three hazards.
std::vector<DisparityCell> disparity_table(const MeiTable& table, std::span<const CensusTract> tracts,
                                           TTestVariant variant = TTestVariant::welch);

/// geoid,pct_poverty200,mei_air,mei_toxic,mei_heat,pct_minority,population
CsvTable scatter_export(const MeiTable& table, std::span<const CensusTract> tracts);

}  // namespace mei
