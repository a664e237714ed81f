// vgkws/plot.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Static plot emission as 24-bit BMP images (no display dependencies).

#ifndef VGKWS_PLOT_HPP_
#define VGKWS_PLOT_HPP_

#include <Eigen/Dense>
#include <filesystem>

#include "vgkws/features.hpp"
#include "vgkws/model.hpp"
#include "vgkws/wav.hpp"

namespace vgkws {

// Waveform envelope with the attention curve overlaid and the predicted
// time marked by a vertical line.
void plot_localisation(const std::filesystem::path& path, const Waveform& wav,
                       const FeatureSequence& features, const LocalisationResult& result,
                       int downsample_factor);

// Grayscale heatmap of a matrix with values in [0, 1], one cell per entry.
void plot_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& values);

}  // namespace vgkws

#endif  // VGKWS_PLOT_HPP_
