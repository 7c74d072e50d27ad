#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/pipeline.hpp"

namespace gzsl::eval {

// Mean over the classes in class_set of that class's own accuracy; classes
// with no samples in labels are skipped with a warning.
double per_class_top1(std::span<const std::uint32_t> preds,
                      std::span<const std::uint32_t> labels,
                      const std::set<std::uint32_t>& class_set);

// 2ab/(a+b), zero when both inputs are zero.
double h_mean(double acc_seen, double acc_unseen);

// Trapezoid rule over the points sorted by x ascending, ties by y
// descending. Points may arrive in any order; the tie rule makes segments
// adjacent to a repeated x meet its highest point, tracing the seen/unseen
// staircase instead of cutting under it.
double trapezoid_area(std::vector<std::pair<double, double>> points);

struct CurvePoint {
    double lambda = 0;
    double acc_seen = 0;
    double acc_unseen = 0;
};

struct EvalReport {
    PredictionMode mode = PredictionMode::gzsl_plain;
    double acc_seen = 0;
    double acc_unseen = 0;
    double h = 0;
    double ausuc = 0;
    std::vector<CurvePoint> curve; // sorted by lambda, +-inf endpoints included
};

// Symmetric grid over [-max_abs_score, max_abs_score] that always contains
// exactly 0.
std::vector<double> make_lambda_grid(double max_abs_score, std::size_t points);

struct ScoredSet {
    std::vector<double> scores; // [n x num_classes]
    std::vector<std::uint32_t> labels;
    std::size_t num_classes = 0;
};

struct AusucResult {
    double area = 0;
    std::vector<CurvePoint> curve;
};

// Calibrated stacking: every seen-class score is shifted down by lambda
// before the argmax, sweeping lambda over the grid plus the +-inf limits.
// The lambda = 0 point reproduces the unshifted accuracies exactly.
AusucResult ausuc(const ScoredSet& test_seen, const ScoredSet& test_unseen,
                  const std::set<std::uint32_t>& seen_classes,
                  const std::set<std::uint32_t>& unseen_classes,
                  std::span<const gate::DomainLabel> class_domains,
                  std::span<const double> lambda_grid);

// Evaluates both test splits over the full label space. In zsl mode only
// acc_unseen is meaningful; the other fields stay zero and the curve empty.
EvalReport full_report(const Pipeline& p, const data::Dataset& ds, std::size_t grid_points,
                       PredictionMode mode);
EvalReport full_report(const Pipeline& p, const data::Dataset& ds, std::size_t grid_points);

void write_report_json(const std::filesystem::path& path, const EvalReport& report);
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);

} // namespace gzsl::eval
