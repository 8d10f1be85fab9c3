#include "ach/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ach {

MeanEstimate mean_and_stderr(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("cannot estimate a mean from no samples");
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples) sum += x;
    const double mean = sum / n;
    if (samples.size() == 1) return {mean, std::numeric_limits<double>::quiet_NaN()};
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

MeanEstimate estimate_pm(std::span<const double> success_fractions) {
    for (double f : success_fractions) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("success fractions must lie in [0, 1]");
    }
    return mean_and_stderr(success_fractions);
}

std::string_view to_string(FitModel model) {
    switch (model) {
        case FitModel::OneMinusPmVsN4Root: return "one_minus_pm_vs_n4root";
        case FitModel::PmVsF: return "pm_vs_f";
        case FitModel::TOverNVsF2: return "t_over_n_vs_f2";
    }
    return "pm_vs_f";
}

FitModel fit_model_from_string(std::string_view s) {
    if (s == "one_minus_pm_vs_n4root") return FitModel::OneMinusPmVsN4Root;
    if (s == "pm_vs_f") return FitModel::PmVsF;
    if (s == "t_over_n_vs_f2") return FitModel::TOverNVsF2;
    throw std::invalid_argument("unknown fit model '" + std::string(s) + "'");
}

namespace {

struct Line {
    double slope;
    double intercept;
    double r_squared;
    double residual_norm;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit needs at least two distinct x values");
    Line line{};
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (line.intercept + line.slope * x[i]);
        rss += r * r;
    }
    line.residual_norm = std::sqrt(rss);
    line.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return line;
}

void check_fit_input(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit needs equally many x and y values");
    if (xs.size() < 2) throw std::invalid_argument("fit needs at least two points");
    for (double y : ys) {
        if (!(y > 0.0)) throw std::invalid_argument("fit needs strictly positive y values");
    }
}

}  // namespace

FitResult fit_exponential(std::span<const double> xs, std::span<const double> ys) {
    check_fit_input(xs, ys);
    std::vector<double> logs(ys.size());
    std::transform(ys.begin(), ys.end(), logs.begin(), [](double y) { return std::log(y); });
    const Line line = least_squares(xs, logs);
    FitResult out;
    out.a = -line.slope;
    out.b = std::exp(line.intercept);
    out.r_squared = line.r_squared;
    out.residual_norm = line.residual_norm;
    out.points = static_cast<int>(xs.size());
    return out;
}

FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys) {
    check_fit_input(xs, ys);
    std::vector<double> lx(xs.size());
    std::vector<double> ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0)) throw std::invalid_argument("power-law fit needs strictly positive x values");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    const Line line = least_squares(lx, ly);
    FitResult out;
    out.a = line.slope;
    out.b = std::exp(line.intercept);
    out.r_squared = line.r_squared;
    out.residual_norm = line.residual_norm;
    out.points = static_cast<int>(xs.size());
    return out;
}

std::vector<FitResult> fit_points(std::span<const PointResult> points, FitModel model) {
    using Key = std::tuple<int, int, int, int, int>;  // topology, mapping, group values
    std::map<Key, std::vector<const PointResult*>> groups;
    for (const auto& p : points) {
        const int topo = static_cast<int>(p.point.topology);
        const int kind = static_cast<int>(p.mapping_kind);
        if (model == FitModel::OneMinusPmVsN4Root) {
            groups[{topo, kind, p.point.F, p.point.M, 0}].push_back(&p);
        } else {
            // Random regular points with different C are separate curves.
            groups[{topo, kind, p.point.nodes, p.point.parameter, 0}].push_back(&p);
        }
    }
    std::vector<FitResult> out;
    for (const auto& [key, members] : groups) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (const PointResult* p : members) {
            double x = 0.0;
            double y = 0.0;
            switch (model) {
                case FitModel::OneMinusPmVsN4Root:
                    x = std::pow(static_cast<double>(p->point.nodes), 0.25);
                    y = 1.0 - p->pm;
                    if (p->pm <= 0.0 || p->pm >= 1.0) continue;
                    break;
                case FitModel::PmVsF:
                    x = p->point.F;
                    y = p->pm;
                    if (p->pm <= 0.0 || p->pm >= 1.0) continue;
                    break;
                case FitModel::TOverNVsF2:
                    x = p->point.F;
                    y = p->mean_T_over_N;
                    if (!(y > 0.0)) continue;
                    break;
            }
            xs.push_back(x);
            ys.push_back(y);
        }
        if (xs.size() < 2) continue;
        if (std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end()) continue;
        FitResult fit = model == FitModel::TOverNVsF2 ? fit_power_law(xs, ys) : fit_exponential(xs, ys);
        fit.model = model;
        const PointResult& first = *members.front();
        const std::string prefix = std::string(to_string(first.point.topology)) + " " +
                                   std::string(to_string(first.mapping_kind)) + " ";
        if (model == FitModel::OneMinusPmVsN4Root) {
            fit.group = prefix + "F=" + std::to_string(first.point.F);
        } else if (first.point.topology == TopologyKind::RandomRegular) {
            fit.group = prefix + "N=" + std::to_string(first.point.nodes) + " C=" + std::to_string(first.point.parameter);
        } else {
            fit.group = prefix + "N=" + std::to_string(first.point.nodes);
        }
        out.push_back(std::move(fit));
    }
    return out;
}

namespace {

double interpolate(const std::vector<CollapseRow>& curve, double u) {
    auto it = std::lower_bound(curve.begin(), curve.end(), u,
                               [](const CollapseRow& r, double v) { return r.u < v; });
    if (it == curve.end()) return curve.back().pm;
    if (it->u == u || it == curve.begin()) return it->pm;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.pm + (hi.pm - lo.pm) * (u - lo.u) / (hi.u - lo.u);
}

}  // namespace

CollapseResult scaling_collapse(std::span<const PointResult> points, int min_nodes) {
    CollapseResult out;
    std::map<int, std::vector<CollapseRow>> curves;
    for (const auto& p : points) {
        CollapseRow row{p.point.F / std::pow(static_cast<double>(p.point.nodes), 0.25), p.pm, p.point.nodes,
                        p.point.F};
        out.rows.push_back(row);
        if (p.point.nodes >= min_nodes) curves[p.point.nodes].push_back(row);
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const CollapseRow& a, const CollapseRow& b) {
        return std::tie(a.nodes, a.u) < std::tie(b.nodes, b.u);
    });
    std::vector<std::vector<CollapseRow>> eligible;
    for (auto& [n, curve] : curves) {
        std::sort(curve.begin(), curve.end(), [](const CollapseRow& a, const CollapseRow& b) { return a.u < b.u; });
        if (curve.size() >= 2) eligible.push_back(curve);
    }
    if (eligible.size() < 2) return out;

    bool overlapped = false;
    double worst = 0.0;
    for (std::size_t i = 0; i < eligible.size(); ++i) {
        for (std::size_t j = i + 1; j < eligible.size(); ++j) {
            const auto& a = eligible[i];
            const auto& b = eligible[j];
            const double lo = std::max(a.front().u, b.front().u);
            const double hi = std::min(a.back().u, b.back().u);
            if (!(lo < hi)) continue;
            overlapped = true;
            std::vector<double> grid{lo, hi};
            for (const auto* c : {&a, &b}) {
                for (const auto& r : *c) {
                    if (r.u > lo && r.u < hi) grid.push_back(r.u);
                }
            }
            for (double u : grid) worst = std::max(worst, std::abs(interpolate(a, u) - interpolate(b, u)));
        }
    }
    if (!overlapped) throw std::invalid_argument("collapse curves have no overlapping u range");
    out.quality = worst;
    return out;
}

}  // namespace ach
