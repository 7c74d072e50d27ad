#include "gzsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "gzsl/error.hpp"
#include "gzsl/log.hpp"

namespace gzsl::eval {

using json = nlohmann::json;

double per_class_top1(std::span<const std::uint32_t> preds,
                      std::span<const std::uint32_t> labels,
                      const std::set<std::uint32_t>& class_set) {
    if (preds.size() != labels.size()) {
        throw ContractError("per_class_top1: " + std::to_string(preds.size()) +
                            " predictions for " + std::to_string(labels.size()) + " labels");
    }
    std::map<std::uint32_t, std::pair<std::size_t, std::size_t>> tally; // correct, total
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!class_set.count(labels[i])) continue;
        auto& [correct, total] = tally[labels[i]];
        ++total;
        if (preds[i] == labels[i]) ++correct;
    }

    double sum = 0.0;
    std::size_t counted = 0;
    for (std::uint32_t c : class_set) {
        auto it = tally.find(c);
        if (it == tally.end()) {
            log_info("eval: warning: class " + std::to_string(c) +
                                 " has no samples, excluded from the per-class mean");
            continue;
        }
        sum += static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
        ++counted;
    }
    if (counted == 0) {
        log_info("eval: warning: no class in the set has samples; accuracy reported as 0");
        return 0.0;
    }
    return sum / static_cast<double>(counted);
}

double h_mean(double acc_seen, double acc_unseen) {
    if (acc_seen < 0 || acc_seen > 1 || acc_unseen < 0 || acc_unseen > 1) {
        throw ContractError("h_mean: accuracies must lie in [0, 1]");
    }
    if (acc_seen == 0.0 && acc_unseen == 0.0) return 0.0;
    return 2.0 * acc_seen * acc_unseen / (acc_seen + acc_unseen);
}

double trapezoid_area(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2) return 0.0;
    // Ties on x order y descending so the path walks the staircase frontier:
    // the segment arriving at a shared x must connect to its highest point,
    // not cut across to the lowest.
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].first - points[i - 1].first) *
                (points[i].second + points[i - 1].second) / 2.0;
    }
    return area;
}

std::vector<double> make_lambda_grid(double max_abs_score, std::size_t points) {
    if (points == 0) throw ContractError("make_lambda_grid: empty grid requested");
    if (!std::isfinite(max_abs_score) || max_abs_score < 0) {
        throw ContractError("make_lambda_grid: span must be finite and non-negative");
    }
    if (points == 1 || max_abs_score == 0.0) return {0.0};

    std::vector<double> grid;
    grid.reserve(points + 1);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = 2.0 * static_cast<double>(i) / static_cast<double>(points - 1) - 1.0;
        grid.push_back(max_abs_score * t);
    }
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

namespace {

// Per-sample reduction of a score row to its best entry on each side of the
// domain split. First index wins ties so the shifted argmax agrees with a
// plain full argmax at lambda = 0.
struct BestPair {
    double seen_val = -std::numeric_limits<double>::infinity();
    std::uint32_t seen_cls = 0;
    double unseen_val = -std::numeric_limits<double>::infinity();
    std::uint32_t unseen_cls = 0;
    bool has_seen = false, has_unseen = false;
};

std::vector<BestPair> decompose(const ScoredSet& set,
                                std::span<const gate::DomainLabel> domains) {
    std::vector<BestPair> out(set.labels.size());
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        BestPair& bp = out[i];
        const double* row = set.scores.data() + i * set.num_classes;
        for (std::size_t y = 0; y < set.num_classes; ++y) {
            if (domains[y] == gate::DomainLabel::seen) {
                if (!bp.has_seen || row[y] > bp.seen_val) {
                    bp.seen_val = row[y];
                    bp.seen_cls = static_cast<std::uint32_t>(y);
                    bp.has_seen = true;
                }
            } else {
                if (!bp.has_unseen || row[y] > bp.unseen_val) {
                    bp.unseen_val = row[y];
                    bp.unseen_cls = static_cast<std::uint32_t>(y);
                    bp.has_unseen = true;
                }
            }
        }
    }
    return out;
}

std::uint32_t shifted_pick(const BestPair& bp, double lambda) {
    if (!bp.has_seen) return bp.unseen_cls;
    if (!bp.has_unseen) return bp.seen_cls;
    const double shifted = bp.seen_val - lambda;
    if (shifted > bp.unseen_val) return bp.seen_cls;
    if (shifted < bp.unseen_val) return bp.unseen_cls;
    return std::min(bp.seen_cls, bp.unseen_cls);
}

} // namespace

AusucResult ausuc(const ScoredSet& test_seen, const ScoredSet& test_unseen,
                  const std::set<std::uint32_t>& seen_classes,
                  const std::set<std::uint32_t>& unseen_classes,
                  std::span<const gate::DomainLabel> class_domains,
                  std::span<const double> lambda_grid) {
    if (lambda_grid.empty()) throw ContractError("ausuc: empty lambda grid");
    if (test_seen.num_classes != class_domains.size() ||
        test_unseen.num_classes != class_domains.size()) {
        throw ContractError("ausuc: score width does not match the domain map");
    }

    const auto seen_best = decompose(test_seen, class_domains);
    const auto unseen_best = decompose(test_unseen, class_domains);

    std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
    lambdas.push_back(-std::numeric_limits<double>::infinity());
    lambdas.push_back(std::numeric_limits<double>::infinity());
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

    AusucResult result;
    std::vector<std::uint32_t> preds;
    for (double lambda : lambdas) {
        CurvePoint pt;
        pt.lambda = lambda;

        preds.clear();
        for (const BestPair& bp : seen_best) preds.push_back(shifted_pick(bp, lambda));
        pt.acc_seen = per_class_top1(preds, test_seen.labels, seen_classes);

        preds.clear();
        for (const BestPair& bp : unseen_best) preds.push_back(shifted_pick(bp, lambda));
        pt.acc_unseen = per_class_top1(preds, test_unseen.labels, unseen_classes);

        result.curve.push_back(pt);
    }

    std::vector<std::pair<double, double>> pts;
    pts.reserve(result.curve.size());
    for (const CurvePoint& pt : result.curve) pts.emplace_back(pt.acc_seen, pt.acc_unseen);
    result.area = trapezoid_area(std::move(pts));
    return result;
}

EvalReport full_report(const Pipeline& p, const data::Dataset& ds, std::size_t grid_points,
                       PredictionMode mode) {
    if (ds.test_seen_idx.empty() && mode != PredictionMode::zsl) {
        throw DataError("full_report: empty seen test split");
    }
    if (ds.test_unseen_idx.empty()) {
        throw DataError("full_report: empty unseen test split");
    }

    EvalReport report;
    report.mode = mode;

    const Predictions unseen_pred =
        predict(p, data::visual_rows(ds, ds.test_unseen_idx), mode);
    const auto unseen_labels = data::labels_at(ds, ds.test_unseen_idx);
    report.acc_unseen = per_class_top1(unseen_pred.class_ids, unseen_labels, ds.unseen_classes);

    if (mode == PredictionMode::zsl) return report;

    const Predictions seen_pred = predict(p, data::visual_rows(ds, ds.test_seen_idx), mode);
    const auto seen_labels = data::labels_at(ds, ds.test_seen_idx);
    report.acc_seen = per_class_top1(seen_pred.class_ids, seen_labels, ds.seen_classes);
    report.h = h_mean(report.acc_seen, report.acc_unseen);

    double max_abs = 0.0;
    for (double s : seen_pred.scores) max_abs = std::max(max_abs, std::abs(s));
    for (double s : unseen_pred.scores) max_abs = std::max(max_abs, std::abs(s));
    const auto grid = make_lambda_grid(max_abs, grid_points);

    ScoredSet seen_set{seen_pred.scores, seen_labels, seen_pred.num_classes};
    ScoredSet unseen_set{unseen_pred.scores, unseen_labels, unseen_pred.num_classes};
    AusucResult sweep = ausuc(seen_set, unseen_set, ds.seen_classes, ds.unseen_classes,
                              p.class_domains, grid);
    report.ausuc = sweep.area;
    report.curve = std::move(sweep.curve);
    return report;
}

EvalReport full_report(const Pipeline& p, const data::Dataset& ds, std::size_t grid_points) {
    return full_report(p, ds, grid_points, p.mode);
}

namespace {

json lambda_json(double lambda) {
    if (std::isinf(lambda)) return lambda > 0 ? "inf" : "-inf";
    return lambda;
}

std::string lambda_text(double lambda) {
    if (std::isinf(lambda)) return lambda > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", lambda);
    return buf;
}

} // namespace

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
    json j;
    j["mode"] = mode_name(report.mode);
    j["acc_seen"] = report.acc_seen;
    j["acc_unseen"] = report.acc_unseen;
    j["h_mean"] = report.h;
    j["ausuc"] = report.ausuc;
    json curve = json::array();
    for (const CurvePoint& pt : report.curve) {
        curve.push_back({{"lambda", lambda_json(pt.lambda)},
                         {"acc_seen", pt.acc_seen},
                         {"acc_unseen", pt.acc_unseen}});
    }
    j["curve"] = std::move(curve);

    std::ofstream os(path);
    if (!os || !(os << j.dump(2) << "\n")) {
        throw DataError("cannot write report " + path.string());
    }
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write curve " + path.string());
    os << "lambda,acc_seen,acc_unseen\n";
    char buf[96];
    for (const CurvePoint& pt : curve) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", pt.acc_seen, pt.acc_unseen);
        os << lambda_text(pt.lambda) << buf;
    }
    if (!os) throw DataError("failed while writing curve " + path.string());
}

} // namespace gzsl::eval
