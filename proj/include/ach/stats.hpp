#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ach/harness.hpp"

namespace ach {

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // NaN for a single sample
};

// Mean and standard error of the per-mapping success fractions.
MeanEstimate estimate_pm(std::span<const double> success_fractions);
// Mean and standard error of arbitrary samples.
MeanEstimate mean_and_stderr(std::span<const double> samples);

enum class FitModel { OneMinusPmVsN4Root, PmVsF, TOverNVsF2 };

std::string_view to_string(FitModel model);
FitModel fit_model_from_string(std::string_view s);

struct FitResult {
    std::optional<FitModel> model;
    std::string group;  // e.g. "F=41" or "lattice N=900"
    // Exponential models: y = b exp(-a x). Power model: y = b x^a.
    double a = 0.0;
    double b = 0.0;
    double r_squared = 0.0;    // of the linearised regression
    double residual_norm = 0.0;
    int points = 0;
};

// Least squares of ln y on x. Requires ys > 0 and at least two points.
FitResult fit_exponential(std::span<const double> xs, std::span<const double> ys);
// Least squares of ln y on ln x. Requires xs, ys > 0 and at least two points.
FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys);

// Tagged fits over campaign points, one per group with at least two
// unsaturated points:
//   one_minus_pm_vs_n4root  per F:  1 - P_m = b exp(-a N^(1/4))
//   pm_vs_f                 per N:  P_m = b exp(-a F)
//   t_over_n_vs_f2          per N:  T/N = b F^a
std::vector<FitResult> fit_points(std::span<const PointResult> points, FitModel model);

struct CollapseRow {
    double u = 0.0;  // F / N^(1/4)
    double pm = 0.0;
    int nodes = 0;
    int F = 0;
};

struct CollapseResult {
    std::vector<CollapseRow> rows;
    // Largest |P_m| gap between curves of different N >= min_nodes,
    // interpolated on their common u range. Absent when fewer than two such
    // curves exist.
    std::optional<double> quality;
};

CollapseResult scaling_collapse(std::span<const PointResult> points, int min_nodes = 900);

}  // namespace ach
