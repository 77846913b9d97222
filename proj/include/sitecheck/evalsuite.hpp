// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sitecheck {

enum class Averaging { kSample, kMicro };

std::string to_string(Averaging averaging);
Averaging averaging_from_string(const std::string& name);  // throws ConfigError

/// Manually labelled reference answers: the fixed label universe and the
/// required regulation refs per report.
struct GroundTruth {
    std::vector<std::string> label_universe;  // ordered, duplicate-free
    std::map<std::string, std::set<std::string>> per_report;

    /// Throws ConfigError when refs fall outside the universe or the
    /// universe is empty / has duplicates.
    void validate() const;
};

/// Parses {"universe":[...],"reports":{"id":["ref",...]}}. Numeric refs are
/// canonicalized to their decimal string form.
GroundTruth ground_truth_from_json(const std::string& json_text);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Citation references recognized in report text. Patterns: "page N",
/// "pages N and M", "pages N, M", "page(s) N-M" (ranges expand; hyphen,
/// en dash or em dash), plus regulation-clause forms such as "Reg 44 & 46"
/// and "Regulation clause 54". Case-insensitive; numbers above 999 are
/// ignored so years and street numbers do not leak in. Unparseable
/// fragments are skipped.
std::set<int> extract_citations(const std::string& report_text);

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;  // includes out-of-universe predictions (overflow)
    std::size_t fn = 0;
    std::size_t tn = 0;
};

/// Per-report label counts. `gt` must be inside the universe; predicted refs
/// outside the universe count as false positives.
Confusion confusion(const std::set<std::string>& gt, const std::set<std::string>& pred,
                    const std::vector<std::string>& universe);

struct ComplianceMetrics {
    double hamming_loss = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    Averaging averaging = Averaging::kSample;
    std::size_t n_reports = 0;
    std::size_t universe_size = 0;
};

/// Scores predictions against ground truth. Sample mode averages per-report
/// precision/recall/F1 (empty-prediction conventions: precision 0 when only
/// the prediction is empty, all three 1 when both sides are empty); micro
/// mode pools TP/FP/FN. Hamming loss is sum(FP+FN) / (n_reports * |universe|)
/// in both modes. Throws KeyMismatchError when report ids disagree.
ComplianceMetrics compute_metrics(const GroundTruth& gt,
                                  const std::map<std::string, std::set<std::string>>& preds,
                                  Averaging averaging);

/// One manual evaluation of a report, each criterion scored 1..10.
struct RubricScore {
    int completeness = 0;
    int relevance = 0;
    int accuracy = 0;
    int clarity_readability = 0;
};

struct CriterionStats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct RubricAggregate {
    CriterionStats completeness;
    CriterionStats relevance;
    CriterionStats accuracy;
    CriterionStats clarity_readability;
};

/// Per-criterion mean and population standard deviation.
/// Throws EmptyInputError for an empty list, ConfigError for out-of-range scores.
RubricAggregate aggregate_rubric(const std::vector<RubricScore>& scores);

struct MetricDelta {
    std::string name;
    double run_a = 0.0;
    double run_b = 0.0;
    double delta = 0.0;                 // b - a
    std::optional<double> relative_pct;  // (b - a) / a * 100; nullopt when a == 0
};

struct DeltaTable {
    std::vector<MetricDelta> rows;
    Averaging averaging = Averaging::kSample;
};

/// Per-metric deltas between two runs with the same averaging mode and
/// universe size. Throws ModeMismatchError otherwise.
DeltaTable compare_runs(const ComplianceMetrics& a, const ComplianceMetrics& b);

/// Fixed-width text rendering of a delta table (4-decimal values).
std::string render_delta_table(const DeltaTable& table);
std::string delta_table_to_json(const DeltaTable& table);

std::string metrics_to_json(const ComplianceMetrics& metrics);
ComplianceMetrics metrics_from_json(const std::string& json_text);
ComplianceMetrics load_metrics(const std::filesystem::path& path);

std::string rubric_aggregate_to_json(const RubricAggregate& aggregate);

}  // namespace sitecheck
