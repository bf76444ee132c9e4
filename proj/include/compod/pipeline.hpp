// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "compod/arrangement.hpp"
#include "compod/extraction.hpp"
#include "compod/labelling.hpp"
#include "compod/metrics.hpp"
#include "compod/primitives.hpp"

namespace compod {

enum class LabelMethod { Normal, Proxy };

struct PipelineConfig {
  DetectionConfig detection;
  Ordering ordering = Ordering::Dynamic;
  Basis basis = Basis::InlierPoints;
  std::size_t hull_samples = 1'000'000;
  double padding_frac = 0.02;
  LabelMethod label_method = LabelMethod::Normal;
  std::string proxy_path;
  LabelConfig labelling;
  // Absolute volume unless tau_is_fraction, in which case it scales the total
  // inside volume.
  double tau = 0.0;
  bool tau_is_fraction = false;
  bool remesh = true;
  bool cell_merge = true;
  std::size_t samples = 100'000;
  std::uint64_t seed = 0;
  int threads = 1;  // never affects results, so not hashed
  std::string out_dir = ".";
  bool timing = false;

  void validate() const;
  ArrangementConfig arrangement() const;
  LabelConfig label_config() const;
};

/// Flat "section.key" -> raw value map from a small TOML subset: [tables],
/// key = value with strings, numbers and booleans, and # comments.
/// Throws ParseError with the line number.
std::map<std::string, std::string> parse_toml(const std::string& text);

/// Applies a parsed file on top of `cfg`. Unknown keys are a ParseError.
void apply_toml(PipelineConfig& cfg, const std::string& text);

/// Canonical text of every result-affecting field.
std::string canonical_config(const PipelineConfig& cfg);
/// 64-bit FNV-1a of canonical_config, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

Ordering parse_ordering(const std::string& s);
/// "points", "hull-vertices", "hull-sampled" or "hull-sampled=N".
void parse_basis(const std::string& s, PipelineConfig& cfg);
/// "normal" or "proxy=<mesh path>".
void parse_label(const std::string& s, PipelineConfig& cfg);
/// "0.5" absolute, "2%" of the inside volume.
void parse_tau(const std::string& s, PipelineConfig& cfg);

/// Inputs needed by the normal-based labelling; unused for proxy labelling.
struct LabelInputs {
  const std::vector<PlanarPrimitive>* primitives = nullptr;
  const PointCloud* cloud = nullptr;
  const SurfaceMesh* proxy = nullptr;
};

OccupancyLabels label_arrangement(const Arrangement& arr, const PipelineConfig& cfg,
                                  const LabelInputs& in);

struct SurfaceOutput {
  SurfaceMesh raw;
  SurfaceMesh remeshed;  // aggregated facets; equals raw when remesh is off
};
SurfaceOutput surface_stage(const Arrangement& arr, const OccupancyLabels& labels,
                            const PipelineConfig& cfg);

/// Sibling merge (unless disabled) followed by the tau-bounded hull merges.
ConvexDecomposition decompose_stage(const Arrangement& arr, const OccupancyLabels& labels,
                                    const PipelineConfig& cfg);

/// Every stage on an in-memory cloud and its primitives.
struct PipelineResult {
  Arrangement arrangement;
  OccupancyLabels labels;
  SurfaceOutput surface;
  ConvexDecomposition decomposition;
  Report report;
};
PipelineResult run_pipeline(const PointCloud& cloud,
                            const std::vector<PlanarPrimitive>& primitives,
                            const PipelineConfig& cfg,
                            const SurfaceMesh* proxy = nullptr);

}  // namespace compod
