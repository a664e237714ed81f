// tests/test_training.cpp
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
#include <limits>
#include <map>
#include <random>

#include "vgkws/training.hpp"

using namespace vgkws;
namespace fs = std::filesystem;

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

FeatureSequence random_features(Eigen::Index t, Eigen::Index d, std::uint64_t seed,
                                const std::string& id = "rand") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureSequence seq;
  seq.frames.resize(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) seq.frames(i, j) = normal(rng);
  }
  seq.utterance_id = id;
  return seq;
}

// A model whose classifier output is a constant logit, used to force
// detect-everything / detect-nothing behaviour in dev_f1 tests.
VgsModelParams constant_logit_model(const Vocabulary& vocab, double logit) {
  VgsModelParams params = init_params(tiny_config(), vocab, 99);
  params.mlp_weights.back().setZero();
  params.mlp_biases.back()(0, 0) = logit;
  return params;
}

// A deterministic toy corpus; every record carries both a caption and a
// soft target row.
struct ToyCorpus {
  std::vector<UtteranceRecord> manifest;
  Vocabulary vocab = vocab_of_size(3);
  VisualTargetStore targets{3};
  std::map<std::string, FeatureSequence> feats;

  CorpusHandles handles() {
    CorpusHandles h;
    h.manifest = &manifest;
    h.vocab = &vocab;
    h.targets = &targets;
    h.features = [this](const UtteranceRecord& rec) { return feats.at(rec.utterance_id); };
    return h;
  }
};

ToyCorpus make_toy_corpus(int n_train, int n_dev, std::uint64_t seed) {
  ToyCorpus c;
  std::mt19937_64 rng(seed);
  int n = n_train + n_dev;
  for (int i = 0; i < n; ++i) {
    UtteranceRecord rec;
    rec.utterance_id = "u" + std::to_string(i);
    rec.audio_path = rec.utterance_id + ".wav";
    rec.split = i < n_train ? Split::kTrain : Split::kDev;
    rec.visual_target_id = "v" + std::to_string(i);
    Eigen::VectorXd y(3);
    std::string caption = "asa";
    for (int w = 0; w < 3; ++w) {
      bool present = rng() % 2 == 0;
      y[w] = present ? 1.0 : 0.0;
      if (present) caption += " t" + std::to_string(w);
    }
    rec.caption_target = caption;
    rec.caption_query = caption;
    c.targets.add(rec.visual_target_id, y);
    // Give present keywords a crude acoustic signature so training has
    // something learnable: a bias on feature column w.
    FeatureSequence f = random_features(24, 4, seed * 1000 + i, rec.utterance_id);
    for (int w = 0; w < 3; ++w) {
      if (y[w] > 0.5) f.frames.col(w).array() += 3.0;
    }
    c.feats[rec.utterance_id] = f;
    c.manifest.push_back(rec);
  }
  return c;
}

}  // namespace

TEST_CASE("bce_loss: anchors") {
  Eigen::VectorXd y(2), p(2);

  // Perfect fit: loss vanishes up to the clamp.
  y << 1.0, 0.0;
  p << 1.0, 0.0;
  CHECK(bce_loss(p, y) == doctest::Approx(0.0).epsilon(1e-6));

  // Uniform predictions against any binary target: ln 2.
  p << 0.5, 0.5;
  CHECK(bce_loss(p, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Hand case: mean of -ln 0.9 and -ln 0.8.
  p << 0.9, 0.2;
  CHECK(bce_loss(p, y) == doctest::Approx(0.16425).epsilon(1e-4));
  CHECK(bce_loss(p, y) ==
        doctest::Approx(-(std::log(0.9) + std::log(0.8)) / 2.0).epsilon(1e-12));
}

TEST_CASE("bce_loss: rejects malformed inputs") {
  Eigen::VectorXd y(2), p(3);
  y << 1.0, 0.0;
  p << 0.5, 0.5, 0.5;
  CHECK_THROWS_AS(bce_loss(p, y), UsageError);
  CHECK_THROWS_AS(bce_loss(Eigen::VectorXd(), Eigen::VectorXd()), UsageError);

  Eigen::VectorXd bad(2);
  bad << 0.5, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bce_loss(bad, y), UsageError);
}

TEST_CASE("a small gradient step reduces the loss, 20 random draws") {
  const double lr = 1e-5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Vocabulary vocab = vocab_of_size(3);
    VgsModelParams params = init_params(tiny_config(), vocab, seed);
    FeatureSequence feats = random_features(16, 4, seed + 500);
    Eigen::VectorXd targets(3);
    std::mt19937_64 rng(seed + 900);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int w = 0; w < 3; ++w) targets[w] = unit(rng);

    VgsModelParams grads = zeros_like(params);
    double before = loss_and_gradients(feats, targets, params, grads);
    auto p = params.tensors();
    auto g = grads.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) *p[i] -= lr * *g[i];
    double after = bce_loss(forward_all(feats, params), targets);
    CHECK(after < before);
  }
}

TEST_CASE("caption_contains_word: whole-token matching, ASCII case folding") {
  CHECK(caption_contains_word("a dog runs", "dog"));
  CHECK(caption_contains_word("The Dog runs", "dog"));
  CHECK_FALSE(caption_contains_word("hotdog stand", "dog"));
  CHECK_FALSE(caption_contains_word("the dogs run", "dog"));
  CHECK(caption_contains_word("aja, dog.", "dog"));
  CHECK_FALSE(caption_contains_word("", "dog"));
  // Non-ASCII words compare byte-for-byte.
  CHECK(caption_contains_word("aworan ti \xe1\xbb\x8d\xcc\x80r\xe1\xbb\x8d" "1 kan",
                              "\xe1\xbb\x8d\xcc\x80r\xe1\xbb\x8d" "1"));
}

TEST_CASE("dev_f1: detect-everything and detect-nothing models") {
  Vocabulary vocab = vocab_of_size(3);
  std::map<std::string, FeatureSequence> feats;
  std::vector<UtteranceRecord> dev;
  // Captions: u0 has t0 and t1; u1 has t0; u2 has none.
  const char* captions[3] = {"t0 t1 xx", "yy t0", "zz ww"};
  for (int i = 0; i < 3; ++i) {
    UtteranceRecord rec;
    rec.utterance_id = "u" + std::to_string(i);
    rec.split = Split::kDev;
    rec.caption_target = captions[i];
    feats[rec.utterance_id] = random_features(20, 4, 42 + i, rec.utterance_id);
    dev.push_back(rec);
  }
  FeatureProvider provider = [&](const UtteranceRecord& rec) {
    return feats.at(rec.utterance_id);
  };

  // Detect everything: TP = 3, FP = 6, FN = 0 over the 9 pairs, so
  // precision 1/3, recall 1 and F1 = 0.5.
  VgsModelParams always = constant_logit_model(vocab, 50.0);
  CHECK(dev_f1(always, dev, vocab, provider, 0.5) == doctest::Approx(0.5));

  // Detect nothing: F1 defined as 0.
  VgsModelParams never = constant_logit_model(vocab, -50.0);
  CHECK(dev_f1(never, dev, vocab, provider, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("train: zero epochs returns the seeded initial parameters untouched") {
  ToyCorpus corpus = make_toy_corpus(6, 2, 3);
  TrainConfig config;
  config.epochs = 0;
  config.seed = 77;
  config.augment = {0, 0, 0, 0};
  ModelConfig mc = tiny_config();

  auto [params, report] = train(corpus.handles(), mc, config);
  VgsModelParams expected = init_params(mc, corpus.vocab, 77);
  auto a = params.tensors();
  auto b = expected.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(report.loss_curve.empty());
  CHECK(report.dev_f1_curve.empty());
  CHECK(report.best_epoch == -1);
}

TEST_CASE("train: deterministic given the seed, and the loss comes down") {
  ToyCorpus corpus = make_toy_corpus(12, 4, 4);
  TrainConfig config;
  config.epochs = 8;
  config.seed = 5;
  config.learning_rate = 2e-3;
  config.batch_size = 4;
  config.augment = {0, 0, 0, 0};
  ModelConfig mc = tiny_config();

  auto [params_a, report_a] = train(corpus.handles(), mc, config);
  auto [params_b, report_b] = train(corpus.handles(), mc, config);
  CHECK(report_a.loss_curve == report_b.loss_curve);
  CHECK(report_a.dev_f1_curve == report_b.dev_f1_curve);
  auto ta = params_a.tensors();
  auto tb = params_b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);

  REQUIRE(report_a.loss_curve.size() == 8);
  CHECK(report_a.loss_curve.back() < report_a.loss_curve.front());
  CHECK(report_a.best_epoch >= 1);
  CHECK(report_a.best_epoch <= 8);

  // A different seed gives a different trajectory.
  config.seed = 6;
  auto [params_c, report_c] = train(corpus.handles(), mc, config);
  CHECK(report_c.loss_curve != report_a.loss_curve);
}

TEST_CASE("transfer_init: restores parameters exactly and resets the step counter") {
  Vocabulary vocab = vocab_of_size(3);
  ModelConfig mc = tiny_config();
  VgsModelParams params = init_params(mc, vocab, 21);
  params.train_steps = 1234;
  fs::path path = fs::temp_directory_path() / "vgkws_transfer.ckpt";
  save_checkpoint(path, params);

  // Same query words, different target words: the transfer corpus.
  Vocabulary retargeted({{0, "q0", "x0"}, {1, "q1", "x1"}, {2, "q2", "x2"}});
  VgsModelParams warm = transfer_init(path, retargeted, mc);
  auto a = params.tensors();
  auto b = warm.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(warm.train_steps == 0);

  // Identical scores on any input.
  FeatureSequence feats = random_features(30, 4, 22);
  CHECK(forward_all(feats, warm) == forward_all(feats, params));

  // Architecture mismatch refused.
  ModelConfig other = mc;
  other.keyword_dim = 6;
  CHECK_THROWS_AS(transfer_init(path, retargeted, other), DataError);

  // Query-word mismatch refused.
  Vocabulary disjoint({{0, "a0", "t0"}, {1, "a1", "t1"}, {2, "a2", "t2"}});
  CHECK_THROWS_AS(transfer_init(path, disjoint, mc), DataError);
}

TEST_CASE("train: transfer initialisation is honoured end to end") {
  ToyCorpus corpus = make_toy_corpus(6, 2, 8);
  ModelConfig mc = tiny_config();
  VgsModelParams donor = init_params(mc, corpus.vocab, 31);
  fs::path path = fs::temp_directory_path() / "vgkws_warm.ckpt";
  save_checkpoint(path, donor);

  TrainConfig config;
  config.epochs = 0;
  config.seed = 1;
  config.augment = {0, 0, 0, 0};
  config.init_checkpoint = path;
  auto [params, report] = train(corpus.handles(), mc, config);
  auto a = params.tensors();
  auto b = donor.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(report.init_checkpoint == path.string());
}
