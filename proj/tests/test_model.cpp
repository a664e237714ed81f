// tests/test_model.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "vgkws/model.hpp"
#include "vgkws/training.hpp"

using namespace vgkws;

namespace {

Vocabulary vocab_of_size(int w) {
  std::vector<Vocabulary::Entry> entries;
  for (int i = 0; i < w; ++i) {
    entries.push_back({i, "q" + std::to_string(i), "t" + std::to_string(i)});
  }
  return Vocabulary(std::move(entries));
}

ModelConfig tiny_config(int input_dim = 4, int w = 3) {
  ModelConfig config;
  config.input_dim = input_dim;
  config.vocab_size = w;
  config.encoder = {{6, 3, 1}, {6, 3, 2}};
  config.keyword_dim = 5;
  config.attention_dim = 4;
  config.classifier_hidden = {7, 5};
  return config;
}

FeatureSequence random_features(Eigen::Index t, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureSequence seq;
  seq.frames.resize(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) seq.frames(i, j) = normal(rng);
  }
  seq.utterance_id = "rand";
  return seq;
}

}  // namespace

TEST_CASE("model config: downsample factor is the product of strides") {
  ModelConfig config = tiny_config();
  CHECK(config.downsample_factor() == 2);
  config.encoder.push_back({4, 3, 2});
  CHECK(config.downsample_factor() == 4);

  ModelConfig full;  // default six-layer encoder, one stride-2 layer
  CHECK(full.downsample_factor() == 2);
}

TEST_CASE("encode_audio: T' = ceil(T / downsample) with same padding") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 1);
  CHECK(params.downsample_factor == 2);

  FeatureSequence f98 = random_features(98, 4, 5);
  CHECK(encode_audio(f98, params).cols() == 49);
  FeatureSequence f99 = random_features(99, 4, 5);
  CHECK(encode_audio(f99, params).cols() == 50);
}

TEST_CASE("encode_audio: purity and the zero-weight case") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 2);
  FeatureSequence feats = random_features(30, 4, 6);
  CHECK(encode_audio(feats, params) == encode_audio(feats, params));

  for (ConvLayer& l : params.encoder) l.weight.setZero();
  params.encoder[0].bias.setConstant(0.5);
  params.encoder[1].bias.setConstant(-1.0);  // ReLU clamps to zero
  Eigen::MatrixXd out = encode_audio(feats, params);
  CHECK(out.isZero());
  params.encoder[1].bias.setConstant(0.25);
  out = encode_audio(feats, params);
  CHECK((out.array() == 0.25).all());
}

TEST_CASE("encode_audio: rejects inputs shorter than the receptive field") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 3);
  FeatureSequence feats = random_features(params.config.min_input_frames() - 1, 4, 7);
  CHECK_THROWS_AS(encode_audio(feats, params), UsageError);
}

TEST_CASE("embed_keyword: table rows and bounds") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 4);
  CHECK(embed_keyword(0, params) == params.keyword_embeddings.row(0).transpose());
  CHECK(embed_keyword(1, params) == embed_keyword(1, params));
  CHECK_THROWS_AS(embed_keyword(3, params), UsageError);
  CHECK_THROWS_AS(embed_keyword(-1, params), UsageError);
}

TEST_CASE("attend: degenerate single frame gives weight 1 and that frame as context") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 5);
  Eigen::MatrixXd one_frame = Eigen::MatrixXd::Random(6, 1);
  AttendResult r = attend(one_frame, embed_keyword(0, params), params);
  CHECK(r.weights.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(1.0));
  CHECK((r.context - one_frame.col(0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("attend: identical frames give uniform weights") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 6);
  Eigen::MatrixXd frames = Eigen::VectorXd::Random(6).replicate(1, 8);
  AttendResult r = attend(frames, embed_keyword(1, params), params);
  for (Eigen::Index t = 0; t < 8; ++t) {
    CHECK(r.weights[t] == doctest::Approx(1.0 / 8.0));
  }
}

TEST_CASE("attend: hand-computed softmax of scores (0, ln 2, ln 4)") {
  // Identity-like params so frame scores equal a chosen vector.
  Vocabulary vocab = vocab_of_size(1);
  ModelConfig config = tiny_config(1, 1);
  config.encoder = {{1, 1, 1}};
  config.keyword_dim = 1;
  config.attention_dim = 1;
  VgsModelParams params = init_params(config, vocab, 7);
  params.frame_proj = Eigen::MatrixXd::Identity(1, 1);
  params.query_proj = Eigen::MatrixXd::Identity(1, 1);
  Eigen::VectorXd kw = Eigen::VectorXd::Ones(1);  // scale = 1/sqrt(1) = 1

  Eigen::MatrixXd frames(1, 3);
  frames << 0.0, std::log(2.0), std::log(4.0);
  AttendResult r = attend(frames, kw, params);
  CHECK(r.weights[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(r.weights[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(r.weights[2] == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("attention weights: non-negative, sum to 1 within 1e-6, 100 random draws") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Vocabulary vocab = vocab_of_size(3);
    VgsModelParams params = init_params(tiny_config(), vocab, seed);
    FeatureSequence feats = random_features(10 + seed % 30, 4, seed * 31 + 1);
    ForwardResult r = forward(feats, static_cast<int>(seed % 3), params);
    CHECK(r.attention.weights.minCoeff() >= 0.0);
    CHECK(r.attention.weights.sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("score: sigmoid anchors and monotonicity") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 8);
  for (Eigen::MatrixXd* t : params.tensors()) t->setZero();
  Eigen::VectorXd context = Eigen::VectorXd::Random(6);
  CHECK(score(context, params) == doctest::Approx(0.5));  // sigmoid(0)

  // Hand-built single-layer classifier: logit 2.0 -> sigma(2.0).
  ModelConfig config = tiny_config();
  config.classifier_hidden = {};
  VgsModelParams flat = init_params(config, vocab, 9);
  flat.mlp_weights[0].setZero();
  flat.mlp_biases[0](0, 0) = 2.0;
  double p2 = score(Eigen::VectorXd::Zero(6), flat);
  CHECK(p2 == doctest::Approx(0.8808).epsilon(1e-4));
  flat.mlp_biases[0](0, 0) = 3.0;
  CHECK(score(Eigen::VectorXd::Zero(6), flat) > p2);  // monotone in the logit

  CHECK_THROWS_AS(score(Eigen::VectorXd::Zero(5), flat), UsageError);
}

TEST_CASE("forward: W scores in (0,1); relabelling invariance") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 10);
  FeatureSequence feats = random_features(40, 4, 11);
  Eigen::VectorXd scores = forward_all(feats, params);
  REQUIRE(scores.size() == 3);
  for (int w = 0; w < 3; ++w) {
    CHECK(scores[w] > 0.0);
    CHECK(scores[w] < 1.0);
    CHECK(scores[w] == forward(feats, w, params).detection_score);
  }

  // Permute keyword rows and query consistently: per-word scores unchanged.
  VgsModelParams permuted = params;
  permuted.keyword_embeddings.row(0) = params.keyword_embeddings.row(2);
  permuted.keyword_embeddings.row(2) = params.keyword_embeddings.row(0);
  CHECK(forward(feats, 0, permuted).detection_score ==
        doctest::Approx(forward(feats, 2, params).detection_score));
  CHECK(forward(feats, 2, permuted).detection_score ==
        doctest::Approx(forward(feats, 0, params).detection_score));
}

TEST_CASE("localise: frame-to-time formula and tie breaking") {
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 12);
  FeatureSequence feats = random_features(98, 4, 13);

  LocalisationResult r = localise(feats, 0, params, 0.5);
  Eigen::Index best = 0;
  r.attention.weights.maxCoeff(&best);
  CHECK(r.predicted_time_s ==
        doctest::Approx((best + 0.5) * 2 * 0.010).epsilon(1e-12));
  CHECK(r.detected == (r.detection_score > 0.5));
  CHECK(r.predicted_time_s >= 0.0);
  CHECK(r.predicted_time_s <= (98 - 1) * 0.010 + 0.025);

  // Concentrated attention on frame 10, hop 10 ms, downsample 2 -> 0.21 s.
  CHECK((10 + 0.5) * 2 * 0.010 == doctest::Approx(0.21));

  // Uniform weights tie-break to the first frame.
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
  Eigen::Index arg = 0;
  uniform.maxCoeff(&arg);
  CHECK(arg == 0);
}

TEST_CASE("gradient check: analytic matches central finite differences") {
  // Tiny model: T=12, D=4, W=3, 64-bit throughout.
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 14);
  FeatureSequence feats = random_features(12, 4, 15);
  Eigen::VectorXd targets(3);
  targets << 1.0, 0.0, 0.7;

  VgsModelParams grads = zeros_like(params);
  loss_and_gradients(feats, targets, params, grads);

  // Independent loss path for the finite differences.
  auto loss_of = [&](const VgsModelParams& p) {
    return bce_loss(forward_all(feats, p), targets);
  };

  const double h = 1e-5;
  double max_rel = 0.0;
  auto p_tensors = params.tensors();
  auto g_tensors = grads.tensors();
  for (std::size_t i = 0; i < p_tensors.size(); ++i) {
    Eigen::MatrixXd& tensor = *p_tensors[i];
    for (Eigen::Index j = 0; j < tensor.size(); ++j) {
      double saved = tensor.data()[j];
      tensor.data()[j] = saved + h;
      double up = loss_of(params);
      tensor.data()[j] = saved - h;
      double down = loss_of(params);
      tensor.data()[j] = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = g_tensors[i]->data()[j];
      double scale = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
      max_rel = std::max(max_rel, std::abs(numeric - analytic) / scale);
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("checkpoint round-trip is lossless and verifies the vocabulary hash") {
  namespace fs = std::filesystem;
  Vocabulary vocab = vocab_of_size(3);
  VgsModelParams params = init_params(tiny_config(), vocab, 16);
  params.train_steps = 41;

  fs::path path = fs::temp_directory_path() / "vgkws_test.ckpt";
  save_checkpoint(path, params);
  VgsModelParams loaded = load_checkpoint(path, vocab);

  auto a = params.tensors();
  auto b = loaded.tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(loaded.train_steps == 41);
  CHECK(loaded.query_words == params.query_words);
  CHECK(loaded.downsample_factor == params.downsample_factor);

  // Same query words, different target words: full load fails, transfer works.
  Vocabulary retargeted({{0, "q0", "x0"}, {1, "q1", "x1"}, {2, "q2", "x2"}});
  CHECK_THROWS_AS(load_checkpoint(path, retargeted), DataError);
  CHECK_NOTHROW(load_checkpoint(path, retargeted, /*allow_transfer_vocab=*/true));

  // Different query words: even transfer mode refuses.
  Vocabulary other({{0, "a0", "t0"}, {1, "a1", "t1"}, {2, "a2", "t2"}});
  CHECK_THROWS_AS(load_checkpoint(path, other, /*allow_transfer_vocab=*/true), DataError);
}
