// vgkws/metrics.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "vgkws/common.hpp"

namespace vgkws {

namespace {

bool inside_interval(double t, const std::pair<double, double>& interval) {
  return t >= interval.first && t <= interval.second;  // closed boundaries
}

void check_pair(const EvalPair& p, double theta) {
  if (p.detection_score > theta && !std::isfinite(p.predicted_time_s)) {
    throw DataError("retrieved pair (" + p.utterance_id + ", " +
                    std::to_string(p.keyword_id) + ") has non-finite predicted time");
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

PrecisionResult actual_localisation_precision(const std::vector<EvalPair>& pairs,
                                              double theta) {
  PrecisionResult r;
  for (const EvalPair& p : pairs) {
    check_pair(p, theta);
    if (p.detection_score > theta) {
      ++r.retrieved;
      if (p.truth_interval && inside_interval(p.predicted_time_s, *p.truth_interval)) {
        ++r.true_positives;
      }
    }
  }
  r.empty_retrieved = (r.retrieved == 0);
  r.value = r.empty_retrieved ? 0.0
                              : static_cast<double>(r.true_positives) / r.retrieved;
  return r;
}

AccuracyResult oracle_localisation_accuracy(const std::vector<EvalPair>& pairs) {
  AccuracyResult r;
  for (const EvalPair& p : pairs) {
    if (!p.truth_interval) continue;
    ++r.positives;
    if (inside_interval(p.predicted_time_s, *p.truth_interval)) ++r.correct;
  }
  if (r.positives == 0) {
    throw DataError("oracle_localisation_accuracy: no ground-truth positives");
  }
  r.value = static_cast<double>(r.correct) / r.positives;
  return r;
}

PrecisionResult detection_precision(const std::vector<EvalPair>& pairs, double theta) {
  PrecisionResult r;
  for (const EvalPair& p : pairs) {
    if (p.detection_score > theta) {
      ++r.retrieved;
      if (p.truth_interval) ++r.true_positives;
    }
  }
  r.empty_retrieved = (r.retrieved == 0);
  r.value = r.empty_retrieved ? 0.0
                              : static_cast<double>(r.true_positives) / r.retrieved;
  return r;
}

DetectionPRF detection_prf(const std::vector<EvalPair>& pairs, double theta) {
  DetectionPRF r;
  for (const EvalPair& p : pairs) {
    bool detected = p.detection_score > theta;
    bool present = p.truth_interval.has_value();
    if (detected && present) ++r.tp;
    else if (detected) ++r.fp;
    else if (present) ++r.fn;
  }
  r.precision = (r.tp + r.fp) == 0 ? 0.0 : static_cast<double>(r.tp) / (r.tp + r.fp);
  r.recall = (r.tp + r.fn) == 0 ? 0.0 : static_cast<double>(r.tp) / (r.tp + r.fn);
  r.f1 = (r.precision + r.recall) == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MetricsReport evaluate_pairs(const std::vector<EvalPair>& pairs, const Vocabulary& vocab,
                             double theta) {
  MetricsReport report;
  report.theta = theta;

  PrecisionResult actual = actual_localisation_precision(pairs, theta);
  AccuracyResult oracle = oracle_localisation_accuracy(pairs);
  PrecisionResult detection = detection_precision(pairs, theta);
  DetectionPRF prf = detection_prf(pairs, theta);

  report.actual_localisation_precision = actual.value;
  report.oracle_localisation_accuracy = oracle.value;
  report.detection_precision = detection.value;
  report.detection_recall = prf.recall;
  report.detection_f1 = prf.f1;
  report.retrieved = actual.retrieved;
  report.true_positives = actual.true_positives;
  report.ground_truth_positives = oracle.positives;

  for (int w = 0; w < vocab.size(); ++w) {
    std::vector<EvalPair> sub;
    for (const EvalPair& p : pairs) {
      if (p.keyword_id == w) sub.push_back(p);
    }
    KeywordRow row;
    row.keyword_id = w;
    row.query_word = vocab.query_word(w);
    row.actual = actual_localisation_precision(sub, theta);
    row.detection = detection_precision(sub, theta);
    row.prf = detection_prf(sub, theta);
    bool has_positive = std::any_of(sub.begin(), sub.end(), [](const EvalPair& p) {
      return p.truth_interval.has_value();
    });
    if (has_positive) row.oracle = oracle_localisation_accuracy(sub);
    report.per_keyword.push_back(std::move(row));
  }
  return report;
}

std::vector<EvalPair> random_baseline(const std::vector<EvalPair>& grid,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<EvalPair> out = grid;
  for (EvalPair& p : out) {
    p.detection_score = unit(rng);
    p.predicted_time_s = unit(rng) * p.utterance_duration_s;
  }
  return out;
}

double mean_interval_coverage(const std::vector<EvalPair>& grid) {
  double sum = 0.0;
  long n = 0;
  for (const EvalPair& p : grid) {
    if (!p.truth_interval) continue;
    if (p.utterance_duration_s <= 0.0) {
      throw UsageError("mean_interval_coverage: pair without utterance duration");
    }
    sum += (p.truth_interval->second - p.truth_interval->first) / p.utterance_duration_s;
    ++n;
  }
  if (n == 0) throw DataError("mean_interval_coverage: no ground-truth positives");
  return sum / static_cast<double>(n);
}

namespace {

AggregateStat stat_of(const std::vector<double>& values) {
  AggregateStat s;
  s.n = static_cast<int>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= s.n;
  if (s.n > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(acc / (s.n - 1));
  }
  return s;
}

}  // namespace

AggregateReport aggregate_runs(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw UsageError("aggregate_runs: no reports");
  for (const MetricsReport& r : reports) {
    if (r.theta != reports.front().theta) {
      throw UsageError("aggregate_runs: mismatched theta across reports");
    }
    if (r.ground_truth_positives != reports.front().ground_truth_positives ||
        r.per_keyword.size() != reports.front().per_keyword.size()) {
      throw UsageError("aggregate_runs: mismatched evaluation grids");
    }
  }
  std::vector<double> a, o, d, f;
  for (const MetricsReport& r : reports) {
    a.push_back(r.actual_localisation_precision);
    o.push_back(r.oracle_localisation_accuracy);
    d.push_back(r.detection_precision);
    f.push_back(r.detection_f1);
  }
  return {stat_of(a), stat_of(o), stat_of(d), stat_of(f)};
}

double cohen_kappa(long both, long first_only, long second_only, long neither) {
  const long n = both + first_only + second_only + neither;
  if (n == 0) throw UsageError("cohen_kappa: empty contingency table");
  const double dn = static_cast<double>(n);
  const double p_o = (both + neither) / dn;
  const double first_yes = (both + first_only) / dn;
  const double second_yes = (both + second_only) / dn;
  const double p_e = first_yes * second_yes + (1.0 - first_yes) * (1.0 - second_yes);
  if (p_e >= 1.0) return 0.0;  // constant raters
  return (p_o - p_e) / (1.0 - p_e);
}

CooccurrenceMatrix cooccurrence_kappa(const std::vector<std::string>& captions_query,
                                      const std::vector<std::string>& captions_target,
                                      const Vocabulary& vocab) {
  if (captions_query.size() != captions_target.size()) {
    throw UsageError("cooccurrence_kappa: caption lists of unequal length (" +
                     std::to_string(captions_query.size()) + " vs " +
                     std::to_string(captions_target.size()) + ")");
  }
  const int W = vocab.size();
  const std::size_t n = captions_query.size();

  // Presence matrices: utterances x keywords.
  std::vector<std::vector<bool>> query_presence(n), target_presence(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::string> q_tokens = tokenize_caption(captions_query[u]);
    std::vector<std::string> t_tokens = tokenize_caption(captions_target[u]);
    query_presence[u].resize(W);
    target_presence[u].resize(W);
    for (int w = 0; w < W; ++w) {
      auto has = [](const std::vector<std::string>& tokens, const std::string& word) {
        std::vector<std::string> wt = tokenize_caption(word);
        return wt.size() == 1 &&
               std::find(tokens.begin(), tokens.end(), wt[0]) != tokens.end();
      };
      query_presence[u][w] = has(q_tokens, vocab.query_word(w));
      target_presence[u][w] = has(t_tokens, vocab.target_word(w));
    }
  }

  CooccurrenceMatrix m;
  m.kappa.resize(W, W);
  m.both = Eigen::MatrixXi::Zero(W, W);
  m.query_only = Eigen::MatrixXi::Zero(W, W);
  m.target_only = Eigen::MatrixXi::Zero(W, W);
  m.neither = Eigen::MatrixXi::Zero(W, W);

  for (int i = 0; i < W; ++i) {
    for (int j = 0; j < W; ++j) {
      long a = 0, b = 0, c = 0, d = 0;
      for (std::size_t u = 0; u < n; ++u) {
        bool q = query_presence[u][i];
        bool t = target_presence[u][j];
        if (q && t) ++a;
        else if (q) ++b;
        else if (t) ++c;
        else ++d;
      }
      m.both(i, j) = static_cast<int>(a);
      m.query_only(i, j) = static_cast<int>(b);
      m.target_only(i, j) = static_cast<int>(c);
      m.neither(i, j) = static_cast<int>(d);
      m.kappa(i, j) = n == 0 ? 0.0 : cohen_kappa(a, b, c, d);
    }
  }

  // Row-max normalisation for display; negatives clamp to 0. Raw kappa is
  // kept alongside.
  m.kappa_normalised = m.kappa.cwiseMax(0.0);
  for (int i = 0; i < W; ++i) {
    double row_max = m.kappa_normalised.row(i).maxCoeff();
    if (row_max > 0.0) m.kappa_normalised.row(i) /= row_max;
  }
  return m;
}

std::string metrics_report_text(const MetricsReport& report) {
  std::ostringstream out;
  out << "theta: " << fmt(report.theta) << "\n";
  out << "actual_localisation_precision: " << fmt(report.actual_localisation_precision)
      << "\n";
  out << "oracle_localisation_accuracy: " << fmt(report.oracle_localisation_accuracy)
      << "\n";
  out << "detection_precision: " << fmt(report.detection_precision) << "\n";
  out << "detection_recall: " << fmt(report.detection_recall) << "\n";
  out << "detection_f1: " << fmt(report.detection_f1) << "\n";
  out << "retrieved: " << report.retrieved << "\n";
  out << "true_positives: " << report.true_positives << "\n";
  out << "ground_truth_positives: " << report.ground_truth_positives << "\n";
  return out.str();
}

std::string metrics_report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "keyword,actual_precision,oracle_accuracy,detection_precision,recall,f1,"
         "retrieved,true_positives,positives,flags\n";
  auto row = [&out](const std::string& name, const PrecisionResult& actual,
                    const std::optional<AccuracyResult>& oracle,
                    const PrecisionResult& detection, const DetectionPRF& prf) {
    std::string flags;
    if (actual.empty_retrieved) flags += "no_retrieved;";
    if (!oracle) flags += "no_positives;";
    out << name << "," << fmt(actual.value) << ","
        << (oracle ? fmt(oracle->value) : std::string("NA")) << ","
        << fmt(detection.value) << "," << fmt(prf.recall) << "," << fmt(prf.f1) << ","
        << actual.retrieved << "," << actual.true_positives << ","
        << (oracle ? oracle->positives : 0) << "," << flags << "\n";
  };
  for (const KeywordRow& kr : report.per_keyword) {
    row(kr.query_word, kr.actual, kr.oracle, kr.detection, kr.prf);
  }
  // Global row.
  PrecisionResult actual{report.actual_localisation_precision, report.retrieved,
                         report.true_positives, report.retrieved == 0};
  AccuracyResult oracle{report.oracle_localisation_accuracy,
                        report.ground_truth_positives, 0};
  PrecisionResult detection{report.detection_precision, report.retrieved, 0, false};
  DetectionPRF prf;
  prf.recall = report.detection_recall;
  prf.f1 = report.detection_f1;
  row("__global__", actual, oracle, detection, prf);
  return out.str();
}

std::string aggregate_report_text(const AggregateReport& agg) {
  std::ostringstream out;
  auto line = [&out](const char* name, const AggregateStat& s) {
    out << name << ": " << fmt(s.mean) << " +- " << fmt(s.stddev) << " (n=" << s.n << ")\n";
  };
  line("actual_localisation_precision", agg.actual);
  line("oracle_localisation_accuracy", agg.oracle);
  line("detection_precision", agg.detection);
  line("detection_f1", agg.f1);
  return out.str();
}

std::string cooccurrence_csv(const CooccurrenceMatrix& matrix, const Vocabulary& vocab) {
  std::ostringstream out;
  out << "query_word";
  for (int j = 0; j < vocab.size(); ++j) out << "," << vocab.target_word(j);
  out << "\n";
  for (int i = 0; i < vocab.size(); ++i) {
    out << vocab.query_word(i);
    for (int j = 0; j < vocab.size(); ++j) out << "," << fmt(matrix.kappa(i, j));
    out << "\n";
  }
  return out.str();
}

std::string cooccurrence_long_csv(const CooccurrenceMatrix& matrix,
                                  const Vocabulary& vocab) {
  std::ostringstream out;
  out << "query_word,target_word,kappa,kappa_normalised\n";
  for (int i = 0; i < vocab.size(); ++i) {
    for (int j = 0; j < vocab.size(); ++j) {
      out << vocab.query_word(i) << "," << vocab.target_word(j) << ","
          << fmt(matrix.kappa(i, j)) << "," << fmt(matrix.kappa_normalised(i, j)) << "\n";
    }
  }
  return out.str();
}

}  // namespace vgkws
