#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace suction {

struct ScoredLabel {
    double score = 0.0;
    int label = 0;
};

struct CurvePoint {
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    double attempt_rate = 0.0;
    double success_rate = 1.0;
};

/// One point per distinct score, thresholds descending; a case is attempted
/// when its score is >= the threshold. Throws on empty input.
std::vector<CurvePoint> precision_recall_curve(const std::vector<ScoredLabel>& data);

/// Trapezoidal area under precision over recall, starting from recall 0 at
/// the first point's precision. 0 when there are no positives.
double average_precision(const std::vector<CurvePoint>& curve);

/// CSV with columns lambda,label (header optional).
std::vector<ScoredLabel> read_scored_csv(const std::filesystem::path& path);
/// (lambda, label) of every tuple in a dataset directory.
std::vector<ScoredLabel> read_dataset_scores(const std::filesystem::path& dataset_dir);

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace suction
