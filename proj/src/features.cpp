// vgkws/features.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "vgkws/common.hpp"

namespace vgkws {

namespace {

int fft_size_for(int frame_length) {
  int n = 1;
  while (n < frame_length) n <<= 1;
  return n;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel filterbank over the positive-frequency FFT bins.
Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers(n_mels + 2);
  for (int m = 0; m < n_mels + 2; ++m) {
    double mel = mel_lo + (mel_hi - mel_lo) * m / (n_mels + 1);
    centers[m] = mel_to_hz(mel) * n_fft / sample_rate;  // in bin units
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (int b = 0; b < n_bins; ++b) {
      if (b > lo && b < mid) {
        fb(m, b) = (b - lo) / (mid - lo);
      } else if (b >= mid && b < hi) {
        fb(m, b) = (hi - b) / (hi - mid);
      }
    }
  }
  return fb;
}

// Orthonormal DCT-II, rows = output coefficients.
Eigen::MatrixXd dct_matrix(int n_out, int n_in) {
  Eigen::MatrixXd dct(n_out, n_in);
  for (int j = 0; j < n_out; ++j) {
    double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / n_in);
    for (int m = 0; m < n_in; ++m) {
      dct(j, m) = scale * std::cos(std::numbers::pi * j * (m + 0.5) / n_in);
    }
  }
  return dct;
}

// Regression deltas with window 2, replicated edges.
Eigen::MatrixXd deltas(const Eigen::MatrixXd& x) {
  const Eigen::Index T = x.rows();
  Eigen::MatrixXd d(T, x.cols());
  constexpr int N = 2;
  constexpr double denom = 10.0;  // 2 * (1^2 + 2^2)
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.cols());
    for (int n = 1; n <= N; ++n) {
      Eigen::Index fwd = std::min(t + n, T - 1);
      Eigen::Index bwd = std::max<Eigen::Index>(t - n, 0);
      acc += n * (x.row(fwd) - x.row(bwd));
    }
    d.row(t) = acc / denom;
  }
  return d;
}

}  // namespace

FeatureSequence compute_mfcc(const Waveform& wav, const FeatureConfig& config,
                             const std::string& utterance_id) {
  const int frame_length = static_cast<int>(std::lround(config.frame_length_s * wav.sample_rate));
  const int hop = static_cast<int>(std::lround(config.frame_hop_s * wav.sample_rate));
  if (wav.samples.empty()) throw UsageError("compute_mfcc: empty waveform");
  if (static_cast<int>(wav.samples.size()) < frame_length) {
    throw UsageError("compute_mfcc: waveform shorter than one frame (" +
                     std::to_string(wav.samples.size()) + " < " +
                     std::to_string(frame_length) + " samples)");
  }
  if (wav.sample_rate != kSampleRate) {
    throw UsageError("compute_mfcc: expected 16 kHz input");
  }

  const int T = 1 + (static_cast<int>(wav.samples.size()) - frame_length) / hop;
  const int n_fft = fft_size_for(frame_length);
  const int n_bins = n_fft / 2 + 1;

  Eigen::VectorXd window(frame_length);
  for (int i = 0; i < frame_length; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (frame_length - 1));
  }
  const Eigen::MatrixXd fb = mel_filterbank(config.n_mels, n_fft, wav.sample_rate);
  const Eigen::MatrixXd dct = dct_matrix(config.n_cepstra, config.n_mels);

  Eigen::FFT<double> fft;
  std::vector<double> buf(n_fft, 0.0);
  std::vector<std::complex<double>> spectrum(n_fft);

  Eigen::MatrixXd cepstra(T, config.n_cepstra);
  Eigen::VectorXd power(n_bins);
  for (int t = 0; t < T; ++t) {
    const double* src = wav.samples.data() + static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < frame_length; ++i) buf[i] = src[i] * window[i];
    std::fill(buf.begin() + frame_length, buf.end(), 0.0);
    fft.fwd(spectrum, buf);
    for (int b = 0; b < n_bins; ++b) power[b] = std::norm(spectrum[b]);
    Eigen::VectorXd mel = (fb * power).cwiseMax(config.log_floor).array().log().matrix();
    cepstra.row(t) = (dct * mel).transpose();
  }

  FeatureSequence seq;
  seq.frame_hop_s = config.frame_hop_s;
  seq.frame_length_s = config.frame_length_s;
  seq.utterance_id = utterance_id;
  if (config.deltas) {
    Eigen::MatrixXd d1 = deltas(cepstra);
    Eigen::MatrixXd d2 = deltas(d1);
    seq.frames.resize(T, 3 * config.n_cepstra);
    seq.frames << cepstra, d1, d2;
  } else {
    seq.frames = std::move(cepstra);
  }
  if (!seq.frames.allFinite()) throw DataError("compute_mfcc produced non-finite values");
  return seq;
}

FeatureSequence spec_augment(const FeatureSequence& features, const AugmentPolicy& policy,
                             std::uint64_t seed) {
  if (policy.n_time_masks < 0 || policy.n_freq_masks < 0 ||
      policy.max_time_mask_frames < 0 || policy.max_freq_mask_bins < 0) {
    throw UsageError("spec_augment: negative policy field");
  }
  FeatureSequence out = features;
  if (policy.is_identity()) return out;

  const Eigen::Index T = out.frames.rows();
  const Eigen::Index D = out.frames.cols();
  const double mean = out.frames.mean();
  std::mt19937_64 rng(seed);

  auto draw = [&rng](Eigen::Index hi) {  // uniform in [0, hi]
    return static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(hi + 1));
  };

  for (int m = 0; m < policy.n_time_masks; ++m) {
    Eigen::Index width = draw(std::min<Eigen::Index>(policy.max_time_mask_frames, T));
    if (width == 0) continue;
    Eigen::Index start = draw(T - width);
    out.frames.middleRows(start, width).setConstant(mean);
  }
  for (int m = 0; m < policy.n_freq_masks; ++m) {
    Eigen::Index width = draw(std::min<Eigen::Index>(policy.max_freq_mask_bins, D));
    if (width == 0) continue;
    Eigen::Index start = draw(D - width);
    out.frames.middleCols(start, width).setConstant(mean);
  }
  return out;
}

std::optional<FeatureSequence> FeatureCache::load(const std::string& utterance_id,
                                                  const FeatureConfig& config) const {
  namespace fs = std::filesystem;
  fs::path header_path = dir_ / (utterance_id + ".hdr");
  fs::path data_path = dir_ / (utterance_id + ".mat");
  if (!fs::exists(header_path) || !fs::exists(data_path)) return std::nullopt;

  std::istringstream hdr(read_file(header_path));
  Eigen::Index T = 0, D = 0;
  double hop = 0.0, win = 0.0;
  std::string key;
  while (hdr >> key) {
    if (key == "T") hdr >> T;
    else if (key == "D") hdr >> D;
    else if (key == "hop_s") hdr >> hop;
    else if (key == "window_s") hdr >> win;
  }
  if (T < 1 || D != config.dim() || hop != config.frame_hop_s ||
      win != config.frame_length_s) {
    return std::nullopt;  // stale cache entry for a different config
  }

  std::string raw = read_file(data_path);
  if (raw.size() != static_cast<std::size_t>(T * D) * sizeof(double)) return std::nullopt;
  FeatureSequence seq;
  seq.frames.resize(T, D);
  std::memcpy(seq.frames.data(), raw.data(), raw.size());
  seq.frame_hop_s = hop;
  seq.frame_length_s = win;
  seq.utterance_id = utterance_id;
  return seq;
}

void FeatureCache::store(const FeatureSequence& features) const {
  if (features.utterance_id.empty()) {
    throw UsageError("FeatureCache::store requires an utterance_id");
  }
  std::ostringstream hdr;
  hdr << "T " << features.frames.rows() << "\nD " << features.frames.cols()
      << "\nhop_s " << features.frame_hop_s << "\nwindow_s " << features.frame_length_s
      << "\n";
  std::string raw(reinterpret_cast<const char*>(features.frames.data()),
                  static_cast<std::size_t>(features.frames.size()) * sizeof(double));
  write_file_atomic(dir_ / (features.utterance_id + ".mat"), raw);
  write_file_atomic(dir_ / (features.utterance_id + ".hdr"), hdr.str());
}

}  // namespace vgkws
