// Generated by gen_stats_table.py; do not edit.
#pragma once

#include <vector>

namespace oracle {

struct WelchCase {
    std::vector<double> a, b;
    double t, df, p;
};

inline const std::vector<WelchCase> kWelchTable = {
    {{1.0, 2.0, 3.0, 4.0, 5.0}, {2.0, 4.0, 6.0, 8.0, 10.0}, -1.8973665961010275992, 5.8823529411764705882, 0.10753119493062724041},
    {{0.1, 0.2, 0.15, 0.3, 0.25, 0.22}, {0.5, 0.45, 0.6, 0.55}, -7.4066602197746956549, 7.0540651364327661614, 0.00014303789050584820537},
    {{10.0, 10.5, 9.8, 10.2}, {10.1, 10.3, 9.9, 10.4, 10.0}, -0.085343527401171794006, 5.1827395251906781847, 0.93518761424295418976},
    {{3.1, 2.9, 3.3, 3.0, 3.2, 2.8, 3.4}, {2.1, 2.4, 1.9, 2.2, 2.3, 2.0, 2.5}, 7.7942286340599474775, 12.0, 4.9044683876819631598e-6},
    {{0.01, 0.02}, {0.9, 0.95, 0.85}, -30.20753458379330106, 2.1179876222798962431, 0.00079206978264687355075},
    {{5.0, 7.0, 6.0, 9.0, 4.0, 8.0}, {5.5, 6.5, 6.0, 7.0, 5.0, 6.2}, 0.57107191151360289122, 6.4179054090070753442, 0.58737845204553730281},
    {{100.0, 120.0, 110.0, 130.0, 90.0}, {95.0, 105.0, 100.0, 98.0, 102.0, 101.0, 99.0}, 1.39443337755679258, 4.2295349469676366603, 0.2319780441765850775},
    {{0.3, 0.31, 0.29, 0.3, 0.32}, {0.1, 0.5, 0.2, 0.6, 0.4}, -0.60295277753403507399, 4.0241858254513520582, 0.57887307573975483263},
    {{1.0, 1.1, 0.9}, {1.05, 0.95, 1.0}, 5.7331670465990083544e-16, 2.9411764705882362161, 0.99999999999999957922},
    {{2.0, 3.0}, {2.5, 3.5}, -0.7071067811865475244, 2.0, 0.55278640450004206072},
    {{0.0, 0.0, 0.0, 1.0}, {1.0, 1.0, 1.0, 0.0, 1.0, 1.0}, -1.9414506867883019271, 5.5960264900662251656, 0.10372121929536363394},
    {{12.5, 14.1, 13.3, 15.0, 12.9, 13.8, 14.4, 13.1}, {11.2, 12.0, 11.8, 12.5, 11.1}, 4.8667697436376099089, 10.76841713924176372, 0.00052874477348454041988},
};

struct TailCase {
    double t, df, p;
};

inline const std::vector<TailCase> kTailTable = {
    {0.5, 1.0, 0.70483276469913345165},
    {1.0, 2.0, 0.42264973081037423549},
    {2.5, 3.0, 0.08770664700806554725},
    {-1.7, 7.5, 0.13006609835733708031},
    {4.0, 10.0, 0.0025183326247366922637},
    {0.1, 30.0, 0.92100961179027115171},
    {12.0, 4.0, 0.00027642854850297295476},
    {3.0, 100.0, 0.003407915343329449537},
    {-6.0, 2.2, 0.021178084342353892352},
    {1.96, 1000.0, 0.050273184955748718435},
};

inline const std::vector<double> kPearsonX = {0.0, 0.076, 0.152, 0.16300000000000003, 0.23900000000000002, 0.25, 0.32600000000000007, 0.402, 0.41300000000000003, 0.489, 0.5, 0.5760000000000001, 0.6520000000000001, 0.663, 0.7390000000000001, 0.75, 0.8260000000000001, 0.9020000000000001, 0.913, 0.9890000000000001};
inline const std::vector<double> kPearsonY = {0.55, 0.28700000000000003, 0.27399999999999997, 0.33799999999999997, 0.325, 0.389, 0.626, 0.44, 0.42699999999999994, 0.414, 0.478, 0.465, 0.779, 0.516, 0.5800000000000001, 0.567, 0.554, 0.618, 0.855, 0.6689999999999999};
inline constexpr double kPearsonR = 0.71873380986733050055;
inline constexpr double kPearsonP = 0.00035654808496642574554;

}  // namespace oracle
