// vgkws/evaluate.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/evaluate.hpp"

#include <algorithm>

namespace vgkws {

namespace {

double features_duration_s(const FeatureSequence& feats) {
  return (feats.num_frames() - 1) * feats.frame_hop_s + feats.frame_length_s;
}

}  // namespace

std::vector<EvalPair> build_eval_grid(const std::vector<UtteranceRecord>& test_records,
                                      const Vocabulary& vocab,
                                      const AlignmentSet& alignments,
                                      const FeatureProvider& features) {
  std::vector<EvalPair> grid;
  for (const UtteranceRecord& rec : test_records) {
    const double duration = features_duration_s(features(rec));
    for (int w = 0; w < vocab.size(); ++w) {
      EvalPair p;
      p.utterance_id = rec.utterance_id;
      p.keyword_id = w;
      p.utterance_duration_s = duration;
      if (auto iv = alignments.find(rec.utterance_id, w)) {
        p.truth_interval = {iv->start_s, iv->end_s};
      }
      grid.push_back(std::move(p));
    }
  }
  return grid;
}

std::vector<EvalPair> score_eval_grid(const std::vector<UtteranceRecord>& test_records,
                                      const Vocabulary& vocab,
                                      const AlignmentSet& alignments,
                                      const FeatureProvider& features,
                                      const VgsModelParams& params, double theta) {
  (void)theta;  // retrieval is decided by the metric code
  std::vector<EvalPair> grid;
  for (const UtteranceRecord& rec : test_records) {
    FeatureSequence feats = features(rec);
    const double duration = features_duration_s(feats);
    Eigen::MatrixXd embeddings = encode_audio(feats, params);
    for (int w = 0; w < vocab.size(); ++w) {
      AttendResult att = attend(embeddings, embed_keyword(w, params), params);
      Eigen::Index best = 0;
      att.weights.maxCoeff(&best);

      EvalPair p;
      p.utterance_id = rec.utterance_id;
      p.keyword_id = w;
      p.detection_score = score(att.context, params);
      p.predicted_time_s = std::min(
          (best + 0.5) * params.downsample_factor * feats.frame_hop_s, duration);
      p.utterance_duration_s = duration;
      if (auto iv = alignments.find(rec.utterance_id, w)) {
        p.truth_interval = {iv->start_s, iv->end_s};
      }
      grid.push_back(std::move(p));
    }
  }
  return grid;
}

}  // namespace vgkws
