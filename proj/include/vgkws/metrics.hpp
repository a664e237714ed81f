// vgkws/metrics.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Evaluation: actual localisation precision, oracle localisation accuracy,
// keyword detection precision (plus recall/F1), the random baseline,
// per-keyword breakdowns, multi-seed aggregation and the normalised
// Cohen's-kappa keyword co-occurrence matrix. All computations are pure.

#ifndef VGKWS_METRICS_HPP_
#define VGKWS_METRICS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vgkws/corpus.hpp"

namespace vgkws {

struct EvalPair {
  std::string utterance_id;
  int keyword_id = -1;
  double detection_score = 0.0;
  double predicted_time_s = 0.0;
  double utterance_duration_s = 0.0;
  // Present iff the keyword occurs in the utterance per the alignment set.
  std::optional<std::pair<double, double>> truth_interval;
};

struct PrecisionResult {
  double value = 0.0;
  long retrieved = 0;
  long true_positives = 0;
  bool empty_retrieved = false;  // value defined as 0, flagged
};

struct AccuracyResult {
  double value = 0.0;
  long positives = 0;
  long correct = 0;
};

// retrieved = score > theta; TP additionally requires a truth interval with
// start <= predicted_time <= end (closed on both boundaries).
PrecisionResult actual_localisation_precision(const std::vector<EvalPair>& pairs,
                                              double theta);

// Over pairs with a truth interval only; detection scores ignored.
// Errors when there are no ground-truth positives.
AccuracyResult oracle_localisation_accuracy(const std::vector<EvalPair>& pairs);

// TP = score > theta and the keyword occurs; localisation ignored.
PrecisionResult detection_precision(const std::vector<EvalPair>& pairs, double theta);

struct DetectionPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0, fp = 0, fn = 0;
};
DetectionPRF detection_prf(const std::vector<EvalPair>& pairs, double theta);

struct KeywordRow {
  int keyword_id = -1;
  std::string query_word;
  PrecisionResult actual;
  std::optional<AccuracyResult> oracle;  // absent when no positives
  PrecisionResult detection;
  DetectionPRF prf;
};

struct MetricsReport {
  double actual_localisation_precision = 0.0;
  double oracle_localisation_accuracy = 0.0;
  double detection_precision = 0.0;
  double detection_recall = 0.0;
  double detection_f1 = 0.0;
  long retrieved = 0;
  long true_positives = 0;       // of actual localisation
  long ground_truth_positives = 0;
  double theta = 0.5;
  std::vector<KeywordRow> per_keyword;
};

MetricsReport evaluate_pairs(const std::vector<EvalPair>& pairs, const Vocabulary& vocab,
                             double theta);

// Replaces scores with U[0,1] and times with U[0, duration], seeded.
std::vector<EvalPair> random_baseline(const std::vector<EvalPair>& grid, std::uint64_t seed);

// Expected oracle accuracy of a uniformly random localiser: the mean
// interval-coverage fraction over ground-truth positives.
double mean_interval_coverage(const std::vector<EvalPair>& grid);

struct AggregateStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when n == 1
  int n = 0;
};

struct AggregateReport {
  AggregateStat actual, oracle, detection, f1;
};

// Reports must share theta; sample standard deviation across runs.
AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports);

struct CooccurrenceMatrix {
  Eigen::MatrixXd kappa;             // raw, in [-1, 1]
  Eigen::MatrixXd kappa_normalised;  // row-max normalised, clamped to [0, 1]
  // Contingency counts per (query, target) pair: both, query-only,
  // target-only, neither.
  Eigen::MatrixXi both, query_only, target_only, neither;
};

// kappa = (p_o - p_e) / (1 - p_e) over the 2x2 presence contingency table;
// defined as 0 for constant raters (p_e == 1).
double cohen_kappa(long both, long first_only, long second_only, long neither);

// Presence of query word i (in query captions) against target word j (in
// target captions), per utterance; caption lists must be parallel.
CooccurrenceMatrix cooccurrence_kappa(const std::vector<std::string>& captions_query,
                                      const std::vector<std::string>& captions_target,
                                      const Vocabulary& vocab);

std::string metrics_report_text(const MetricsReport& report);
std::string metrics_report_csv(const MetricsReport& report);
std::string aggregate_report_text(const AggregateReport& agg);
std::string cooccurrence_csv(const CooccurrenceMatrix& matrix, const Vocabulary& vocab);
std::string cooccurrence_long_csv(const CooccurrenceMatrix& matrix, const Vocabulary& vocab);

}  // namespace vgkws

#endif  // VGKWS_METRICS_HPP_
