// vgkws/model.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

namespace vgkws {

namespace {

constexpr char kCheckpointMagic[] = "VGKWSCKPT1\n";
constexpr double kProbClamp = 1e-7;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Index conv_output_length(Eigen::Index t_in, int stride) {
  return (t_in + stride - 1) / stride;  // ceil, same-padding
}

// Gathers the strided receptive fields of X into a (C_in*k) x T_out matrix.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& x, int kernel, int stride) {
  const Eigen::Index c_in = x.rows();
  const Eigen::Index t_in = x.cols();
  const Eigen::Index t_out = conv_output_length(t_in, stride);
  const Eigen::Index pad_left =
      std::max<Eigen::Index>(0, ((t_out - 1) * stride + kernel - t_in) / 2);

  Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(c_in * kernel, t_out);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    const Eigen::Index base = t * stride - pad_left;
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index src = base + j;
      if (src >= 0 && src < t_in) {
        cols.block(static_cast<Eigen::Index>(j) * c_in, t, c_in, 1) = x.col(src);
      }
    }
  }
  return cols;
}

// Scatter-add of im2col gradients back onto the input layout.
void col2im_add(const Eigen::MatrixXd& d_cols, Eigen::Index c_in, Eigen::Index t_in,
                int kernel, int stride, Eigen::MatrixXd& dx) {
  const Eigen::Index t_out = d_cols.cols();
  const Eigen::Index pad_left =
      std::max<Eigen::Index>(0, ((t_out - 1) * stride + kernel - t_in) / 2);
  for (Eigen::Index t = 0; t < t_out; ++t) {
    const Eigen::Index base = t * stride - pad_left;
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index dst = base + j;
      if (dst >= 0 && dst < t_in) {
        dx.col(dst) += d_cols.block(static_cast<Eigen::Index>(j) * c_in, t, c_in, 1);
      }
    }
  }
}

struct EncoderTrace {
  std::vector<Eigen::MatrixXd> cols;    // im2col per layer
  std::vector<Eigen::MatrixXd> preact;  // pre-ReLU per layer
  std::vector<Eigen::Index> input_lengths;
};

Eigen::MatrixXd encoder_forward(const Eigen::MatrixXd& input, const VgsModelParams& params,
                                EncoderTrace* trace) {
  Eigen::MatrixXd x = input;
  for (const ConvLayer& layer : params.encoder) {
    Eigen::MatrixXd cols = im2col(x, layer.kernel, layer.stride);
    Eigen::MatrixXd z = layer.weight * cols;
    z.colwise() += Eigen::VectorXd(layer.bias.col(0));
    if (trace != nullptr) {
      trace->input_lengths.push_back(x.cols());
      trace->cols.push_back(std::move(cols));
      trace->preact.push_back(z);
    }
    x = z.cwiseMax(0.0);
  }
  return x;
}

void encoder_backward(const Eigen::MatrixXd& d_output, const VgsModelParams& params,
                      const EncoderTrace& trace, VgsModelParams& grads) {
  Eigen::MatrixXd dy = d_output;
  for (int l = static_cast<int>(params.encoder.size()) - 1; l >= 0; --l) {
    const ConvLayer& layer = params.encoder[l];
    Eigen::MatrixXd dz =
        dy.cwiseProduct((trace.preact[l].array() > 0.0).cast<double>().matrix());
    grads.encoder[l].weight += dz * trace.cols[l].transpose();
    grads.encoder[l].bias.col(0) += dz.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd d_cols = layer.weight.transpose() * dz;
    Eigen::MatrixXd dx =
        Eigen::MatrixXd::Zero(layer.in_channels, trace.input_lengths[l]);
    col2im_add(d_cols, layer.in_channels, trace.input_lengths[l], layer.kernel,
               layer.stride, dx);
    dy = std::move(dx);
  }
}

struct MlpTrace {
  std::vector<Eigen::VectorXd> activations;  // input + post-ReLU per hidden layer
  std::vector<Eigen::VectorXd> preact;
};

double mlp_forward(const Eigen::VectorXd& input, const VgsModelParams& params,
                   MlpTrace* trace) {
  Eigen::VectorXd h = input;
  if (trace != nullptr) trace->activations.push_back(h);
  const std::size_t n = params.mlp_weights.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Eigen::VectorXd z = params.mlp_weights[i] * h + params.mlp_biases[i].col(0);
    if (trace != nullptr) trace->preact.push_back(z);
    h = z.cwiseMax(0.0);
    if (trace != nullptr) trace->activations.push_back(h);
  }
  double logit = (params.mlp_weights[n - 1] * h)(0, 0) + params.mlp_biases[n - 1](0, 0);
  if (trace != nullptr) trace->preact.push_back(Eigen::VectorXd::Constant(1, logit));
  return logit;
}

// Returns d(input); accumulates weight/bias gradients.
Eigen::VectorXd mlp_backward(double d_logit, const VgsModelParams& params,
                             const MlpTrace& trace, VgsModelParams& grads) {
  const std::size_t n = params.mlp_weights.size();
  Eigen::VectorXd dh =
      params.mlp_weights[n - 1].transpose() * Eigen::VectorXd::Constant(1, d_logit);
  grads.mlp_weights[n - 1] += d_logit * trace.activations[n - 1].transpose();
  grads.mlp_biases[n - 1](0, 0) += d_logit;
  for (int i = static_cast<int>(n) - 2; i >= 0; --i) {
    Eigen::VectorXd dz =
        dh.cwiseProduct((trace.preact[i].array() > 0.0).cast<double>().matrix());
    grads.mlp_weights[i] += dz * trace.activations[i].transpose();
    grads.mlp_biases[i].col(0) += dz;
    dh = params.mlp_weights[i].transpose() * dz;
  }
  return dh;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  Eigen::VectorXd shifted = scores.array() - scores.maxCoeff();
  Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

Eigen::MatrixXd features_as_input(const FeatureSequence& features) {
  return features.frames.transpose();  // D x T
}

void fill_uniform(Eigen::MatrixXd& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
}

void append_u64(std::string& s, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  s.append(buf, 8);
}

std::uint64_t take_u64(const std::string& s, std::size_t& pos) {
  if (pos + 8 > s.size()) throw DataError("truncated checkpoint");
  std::uint64_t v;
  std::memcpy(&v, s.data() + pos, 8);
  pos += 8;
  return v;
}

}  // namespace

int ModelConfig::downsample_factor() const {
  int f = 1;
  for (const ConvSpec& l : encoder) f *= l.stride;
  return f;
}

int ModelConfig::min_input_frames() const {
  int rf = 1;
  int jump = 1;
  for (const ConvSpec& l : encoder) {
    rf += (l.kernel - 1) * jump;
    jump *= l.stride;
  }
  return rf;
}

bool ModelConfig::same_architecture(const ModelConfig& other) const {
  if (input_dim != other.input_dim || vocab_size != other.vocab_size ||
      keyword_dim != other.keyword_dim || attention_dim != other.attention_dim ||
      classifier_hidden != other.classifier_hidden ||
      encoder.size() != other.encoder.size()) {
    return false;
  }
  for (std::size_t i = 0; i < encoder.size(); ++i) {
    if (encoder[i].out_channels != other.encoder[i].out_channels ||
        encoder[i].kernel != other.encoder[i].kernel ||
        encoder[i].stride != other.encoder[i].stride) {
      return false;
    }
  }
  return true;
}

ModelConfig small_model_config(int input_dim, int vocab_size) {
  ModelConfig config;
  config.input_dim = input_dim;
  config.vocab_size = vocab_size;
  config.encoder = {{32, 9, 1}, {32, 5, 2}};
  config.keyword_dim = 16;
  config.attention_dim = 24;
  config.classifier_hidden = {64, 64};
  return config;
}

std::vector<Eigen::MatrixXd*> VgsModelParams::tensors() {
  std::vector<Eigen::MatrixXd*> out;
  for (ConvLayer& l : encoder) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  out.push_back(&keyword_embeddings);
  out.push_back(&frame_proj);
  out.push_back(&query_proj);
  for (std::size_t i = 0; i < mlp_weights.size(); ++i) {
    out.push_back(&mlp_weights[i]);
    out.push_back(&mlp_biases[i]);
  }
  return out;
}

std::vector<const Eigen::MatrixXd*> VgsModelParams::tensors() const {
  auto mutable_list = const_cast<VgsModelParams*>(this)->tensors();
  return {mutable_list.begin(), mutable_list.end()};
}

void VgsModelParams::check_finite() const {
  for (const Eigen::MatrixXd* t : tensors()) {
    if (!t->allFinite()) throw DataError("non-finite model parameter tensor");
  }
}

VgsModelParams init_params(const ModelConfig& config, const Vocabulary& vocab,
                           std::uint64_t seed) {
  if (config.vocab_size != vocab.size()) {
    throw UsageError("config.vocab_size " + std::to_string(config.vocab_size) +
                     " != vocabulary size " + std::to_string(vocab.size()));
  }
  std::mt19937_64 rng(seed);
  VgsModelParams p;
  p.config = config;
  p.downsample_factor = config.downsample_factor();
  p.seed = seed;

  int in_ch = config.input_dim;
  for (const ConvSpec& spec : config.encoder) {
    ConvLayer layer;
    layer.in_channels = in_ch;
    layer.kernel = spec.kernel;
    layer.stride = spec.stride;
    layer.weight.resize(spec.out_channels, in_ch * spec.kernel);
    fill_uniform(layer.weight, 1.0 / std::sqrt(static_cast<double>(in_ch * spec.kernel)), rng);
    layer.bias = Eigen::MatrixXd::Zero(spec.out_channels, 1);
    p.encoder.push_back(std::move(layer));
    in_ch = spec.out_channels;
  }
  const int c_enc = in_ch;

  p.keyword_embeddings.resize(config.vocab_size, config.keyword_dim);
  fill_uniform(p.keyword_embeddings, 1.0 / std::sqrt(static_cast<double>(config.keyword_dim)), rng);
  p.frame_proj.resize(config.attention_dim, c_enc);
  fill_uniform(p.frame_proj, 1.0 / std::sqrt(static_cast<double>(c_enc)), rng);
  p.query_proj.resize(config.attention_dim, config.keyword_dim);
  fill_uniform(p.query_proj, 1.0 / std::sqrt(static_cast<double>(config.keyword_dim)), rng);

  int in_dim = c_enc;
  for (int h : config.classifier_hidden) {
    Eigen::MatrixXd w(h, in_dim);
    fill_uniform(w, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
    p.mlp_weights.push_back(std::move(w));
    p.mlp_biases.push_back(Eigen::MatrixXd::Zero(h, 1));
    in_dim = h;
  }
  Eigen::MatrixXd w_out(1, in_dim);
  fill_uniform(w_out, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
  p.mlp_weights.push_back(std::move(w_out));
  p.mlp_biases.push_back(Eigen::MatrixXd::Zero(1, 1));

  p.vocab_hash_full = vocab.hash_full();
  p.vocab_hash_query = vocab.hash_query();
  for (const auto& e : vocab.entries()) p.query_words.push_back(e.query_word);
  return p;
}

VgsModelParams zeros_like(const VgsModelParams& params) {
  VgsModelParams z = params;
  for (Eigen::MatrixXd* t : z.tensors()) t->setZero();
  return z;
}

Eigen::MatrixXd encode_audio(const FeatureSequence& features, const VgsModelParams& params) {
  if (features.dim() != params.config.input_dim) {
    throw UsageError("feature dimension " + std::to_string(features.dim()) +
                     " != model input_dim " + std::to_string(params.config.input_dim));
  }
  if (features.num_frames() < params.config.min_input_frames()) {
    throw UsageError("utterance of " + std::to_string(features.num_frames()) +
                     " frames is shorter than the encoder receptive field (" +
                     std::to_string(params.config.min_input_frames()) + ")");
  }
  return encoder_forward(features_as_input(features), params, nullptr);
}

Eigen::VectorXd embed_keyword(int keyword_id, const VgsModelParams& params) {
  if (keyword_id < 0 || keyword_id >= params.config.vocab_size) {
    throw UsageError("keyword_id " + std::to_string(keyword_id) + " out of range [0, " +
                     std::to_string(params.config.vocab_size) + ")");
  }
  return params.keyword_embeddings.row(keyword_id).transpose();
}

AttendResult attend(const Eigen::MatrixXd& frame_embeddings,
                    const Eigen::VectorXd& keyword_embedding,
                    const VgsModelParams& params) {
  if (frame_embeddings.cols() < 1) throw UsageError("attend: empty frame sequence");
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config.attention_dim));
  Eigen::MatrixXd v = params.frame_proj * frame_embeddings;  // d_a x T'
  Eigen::VectorXd u = params.query_proj * keyword_embedding;
  Eigen::VectorXd scores = scale * (v.transpose() * u);
  AttendResult result;
  result.weights = softmax(scores);
  result.context = frame_embeddings * result.weights;
  return result;
}

double score(const Eigen::VectorXd& context, const VgsModelParams& params) {
  if (context.size() != params.mlp_weights.front().cols()) {
    throw UsageError("context dimension " + std::to_string(context.size()) +
                     " != classifier input " +
                     std::to_string(params.mlp_weights.front().cols()));
  }
  return sigmoid(mlp_forward(context, params, nullptr));
}

ForwardResult forward(const FeatureSequence& features, int keyword_id,
                      const VgsModelParams& params) {
  Eigen::MatrixXd embeddings = encode_audio(features, params);
  AttendResult att = attend(embeddings, embed_keyword(keyword_id, params), params);
  ForwardResult result;
  result.detection_score = score(att.context, params);
  result.attention.weights = std::move(att.weights);
  result.attention.utterance_id = features.utterance_id;
  result.attention.keyword_id = keyword_id;
  return result;
}

Eigen::VectorXd forward_all(const FeatureSequence& features, const VgsModelParams& params) {
  Eigen::MatrixXd embeddings = encode_audio(features, params);
  Eigen::VectorXd scores(params.config.vocab_size);
  for (int w = 0; w < params.config.vocab_size; ++w) {
    AttendResult att = attend(embeddings, embed_keyword(w, params), params);
    scores[w] = score(att.context, params);
  }
  return scores;
}

LocalisationResult localise(const FeatureSequence& features, int keyword_id,
                            const VgsModelParams& params, double theta) {
  ForwardResult fwd = forward(features, keyword_id, params);
  Eigen::Index best = 0;
  fwd.attention.weights.maxCoeff(&best);  // Eigen returns the lowest tied index

  LocalisationResult result;
  result.keyword_id = keyword_id;
  result.detection_score = fwd.detection_score;
  result.detected = fwd.detection_score > theta;
  const double duration =
      (features.num_frames() - 1) * features.frame_hop_s + features.frame_length_s;
  result.predicted_time_s =
      std::min((best + 0.5) * params.downsample_factor * features.frame_hop_s, duration);
  result.attention = std::move(fwd.attention);
  return result;
}

double loss_and_gradients(const FeatureSequence& features, const Eigen::VectorXd& targets,
                          const VgsModelParams& params, VgsModelParams& grads) {
  const int W = params.config.vocab_size;
  if (targets.size() != W) {
    throw UsageError("targets length " + std::to_string(targets.size()) +
                     " != vocab size " + std::to_string(W));
  }
  if (!targets.allFinite()) throw UsageError("non-finite targets");
  if (features.num_frames() < params.config.min_input_frames()) {
    throw UsageError("utterance shorter than the encoder receptive field");
  }

  EncoderTrace enc_trace;
  Eigen::MatrixXd embeddings =
      encoder_forward(features_as_input(features), params, &enc_trace);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.config.attention_dim));
  Eigen::MatrixXd v = params.frame_proj * embeddings;  // d_a x T'

  Eigen::MatrixXd d_embeddings = Eigen::MatrixXd::Zero(embeddings.rows(), embeddings.cols());
  Eigen::MatrixXd d_v = Eigen::MatrixXd::Zero(v.rows(), v.cols());

  double loss = 0.0;
  for (int w = 0; w < W; ++w) {
    Eigen::VectorXd q = params.keyword_embeddings.row(w).transpose();
    Eigen::VectorXd u = params.query_proj * q;
    Eigen::VectorXd alpha = softmax(scale * (v.transpose() * u));
    Eigen::VectorXd context = embeddings * alpha;

    MlpTrace mlp_trace;
    double logit = mlp_forward(context, params, &mlp_trace);
    double p = sigmoid(logit);
    double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    double y = targets[w];
    loss += -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc)) / W;

    double d_logit;
    if (p > kProbClamp && p < 1.0 - kProbClamp) {
      d_logit = (p - y) / W;
    } else {
      d_logit = 0.0;  // clamp region is flat
    }

    Eigen::VectorXd d_context = mlp_backward(d_logit, params, mlp_trace, grads);
    Eigen::VectorXd d_alpha = embeddings.transpose() * d_context;
    d_embeddings += d_context * alpha.transpose();
    Eigen::VectorXd d_scores =
        alpha.cwiseProduct((d_alpha.array() - alpha.dot(d_alpha)).matrix());
    Eigen::VectorXd d_u = scale * (v * d_scores);
    d_v += scale * (u * d_scores.transpose());
    grads.query_proj += d_u * q.transpose();
    grads.keyword_embeddings.row(w) += (params.query_proj.transpose() * d_u).transpose();
  }

  d_embeddings += params.frame_proj.transpose() * d_v;
  grads.frame_proj += d_v * embeddings.transpose();
  encoder_backward(d_embeddings, params, enc_trace, grads);
  return loss;
}

void save_checkpoint(const std::filesystem::path& path, const VgsModelParams& params) {
  std::ostringstream meta;
  meta << "input_dim=" << params.config.input_dim << "\n";
  meta << "vocab_size=" << params.config.vocab_size << "\n";
  meta << "keyword_dim=" << params.config.keyword_dim << "\n";
  meta << "attention_dim=" << params.config.attention_dim << "\n";
  meta << "classifier_hidden=";
  for (std::size_t i = 0; i < params.config.classifier_hidden.size(); ++i) {
    meta << (i ? "," : "") << params.config.classifier_hidden[i];
  }
  meta << "\nencoder=";
  for (std::size_t i = 0; i < params.config.encoder.size(); ++i) {
    const ConvSpec& l = params.config.encoder[i];
    meta << (i ? "," : "") << l.out_channels << ":" << l.kernel << ":" << l.stride;
  }
  meta << "\ndownsample_factor=" << params.downsample_factor << "\n";
  meta << "vocab_hash_full=" << params.vocab_hash_full << "\n";
  meta << "vocab_hash_query=" << params.vocab_hash_query << "\n";
  meta << "seed=" << params.seed << "\n";
  meta << "train_steps=" << params.train_steps << "\n";
  meta << "query_words=";
  for (std::size_t i = 0; i < params.query_words.size(); ++i) {
    meta << (i ? "\t" : "") << params.query_words[i];
  }
  meta << "\n";

  std::string out = kCheckpointMagic;
  std::string meta_str = meta.str();
  append_u64(out, meta_str.size());
  out += meta_str;

  auto tensor_list = params.tensors();
  append_u64(out, tensor_list.size());
  for (const Eigen::MatrixXd* t : tensor_list) {
    append_u64(out, static_cast<std::uint64_t>(t->rows()));
    append_u64(out, static_cast<std::uint64_t>(t->cols()));
    out.append(reinterpret_cast<const char*>(t->data()),
               static_cast<std::size_t>(t->size()) * sizeof(double));
  }
  write_file_atomic(path, out);
}

VgsModelParams load_checkpoint(const std::filesystem::path& path) {
  std::string data = read_file(path);
  const std::size_t magic_len = sizeof(kCheckpointMagic) - 1;
  if (data.size() < magic_len || data.compare(0, magic_len, kCheckpointMagic) != 0) {
    throw DataError("not a vgkws checkpoint: " + path.string());
  }
  std::size_t pos = magic_len;
  std::uint64_t meta_len = take_u64(data, pos);
  if (pos + meta_len > data.size()) throw DataError("truncated checkpoint metadata");
  std::string meta = data.substr(pos, meta_len);
  pos += meta_len;

  ModelConfig config;
  config.encoder.clear();
  config.classifier_hidden.clear();
  std::uint64_t hash_full = 0, hash_query = 0, seed = 0;
  std::int64_t train_steps = 0;
  int downsample = 1;
  std::vector<std::string> query_words;

  std::istringstream meta_in(meta);
  std::string line;
  auto split_list = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(cur);
    return parts;
  };
  while (std::getline(meta_in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "input_dim") config.input_dim = std::stoi(value);
    else if (key == "vocab_size") config.vocab_size = std::stoi(value);
    else if (key == "keyword_dim") config.keyword_dim = std::stoi(value);
    else if (key == "attention_dim") config.attention_dim = std::stoi(value);
    else if (key == "classifier_hidden") {
      for (const std::string& p : split_list(value, ',')) {
        if (!p.empty()) config.classifier_hidden.push_back(std::stoi(p));
      }
    } else if (key == "encoder") {
      for (const std::string& p : split_list(value, ',')) {
        if (p.empty()) continue;
        auto f = split_list(p, ':');
        if (f.size() != 3) throw DataError("bad encoder spec in checkpoint: " + p);
        config.encoder.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2])});
      }
    } else if (key == "downsample_factor") downsample = std::stoi(value);
    else if (key == "vocab_hash_full") hash_full = std::stoull(value);
    else if (key == "vocab_hash_query") hash_query = std::stoull(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "train_steps") train_steps = std::stoll(value);
    else if (key == "query_words" && !value.empty()) query_words = split_list(value, '\t');
  }
  if (config.vocab_size <= 0 || config.encoder.empty()) {
    throw DataError("incomplete checkpoint metadata: " + path.string());
  }
  if (downsample != config.downsample_factor()) {
    throw DataError("checkpoint downsample_factor inconsistent with encoder strides");
  }

  VgsModelParams p;
  p.config = config;
  p.downsample_factor = downsample;
  p.vocab_hash_full = hash_full;
  p.vocab_hash_query = hash_query;
  p.seed = seed;
  p.train_steps = train_steps;
  p.query_words = std::move(query_words);

  int in_ch = config.input_dim;
  for (const ConvSpec& spec : config.encoder) {
    ConvLayer layer;
    layer.in_channels = in_ch;
    layer.kernel = spec.kernel;
    layer.stride = spec.stride;
    p.encoder.push_back(std::move(layer));
    in_ch = spec.out_channels;
  }
  p.mlp_weights.resize(config.classifier_hidden.size() + 1);
  p.mlp_biases.resize(config.classifier_hidden.size() + 1);

  std::uint64_t tensor_count = take_u64(data, pos);
  auto tensor_list = p.tensors();
  if (tensor_count != tensor_list.size()) {
    throw DataError("checkpoint tensor count mismatch: " + path.string());
  }
  for (Eigen::MatrixXd* t : tensor_list) {
    std::uint64_t rows = take_u64(data, pos);
    std::uint64_t cols = take_u64(data, pos);
    std::size_t bytes = static_cast<std::size_t>(rows) * cols * sizeof(double);
    if (pos + bytes > data.size()) throw DataError("truncated checkpoint tensors");
    t->resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::memcpy(t->data(), data.data() + pos, bytes);
    pos += bytes;
  }
  p.check_finite();
  return p;
}

VgsModelParams load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                               bool allow_transfer_vocab) {
  VgsModelParams p = load_checkpoint(path);
  if (p.config.vocab_size != vocab.size()) {
    throw DataError("checkpoint vocab size " + std::to_string(p.config.vocab_size) +
                    " != corpus vocab size " + std::to_string(vocab.size()));
  }
  if (allow_transfer_vocab) {
    if (p.vocab_hash_query != vocab.hash_query()) {
      for (int i = 0; i < vocab.size(); ++i) {
        const std::string& have =
            i < static_cast<int>(p.query_words.size()) ? p.query_words[i] : std::string();
        if (have != vocab.query_word(i)) {
          throw DataError("query-word set mismatch at id " + std::to_string(i) + ": '" +
                          have + "' vs '" + vocab.query_word(i) + "'");
        }
      }
      throw DataError("query vocabulary hash mismatch");
    }
  } else if (p.vocab_hash_full != vocab.hash_full()) {
    throw DataError("vocabulary hash mismatch between checkpoint and corpus "
                    "(use transfer mode for cross-corpus loading)");
  }
  return p;
}

}  // namespace vgkws
