// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file labelgen.hpp
/// @brief Synthetic dataset generation: per-image mode/severity sampling,
/// operator application, analytical labels and mask composition.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sensorsentry/core.hpp"
#include "sensorsentry/manifest.hpp"
#include "sensorsentry/raster.hpp"
#include "sensorsentry/synthesis.hpp"

namespace sensorsentry {

/// Each image is drawn from a three-way categorical: clean with probability
/// clean_fraction, two modes with probability (1 - clean_fraction) *
/// two_mode_fraction, one mode otherwise. Severities are i.i.d. U[0,1).
struct SamplingPolicy {
  double clean_fraction = 0.15;
  double two_mode_fraction = 0.25;
  std::uint64_t global_seed = 0;

  void validate() const;
};

inline constexpr int kMaxPairAttempts = 20;

/// Per-record seed; the stream for mode m of the record is
/// derive_key(record_seed, mode_id(m)).
std::uint64_t record_seed(std::uint64_t global_seed, std::uint64_t image_index);
std::uint64_t mode_stream(std::uint64_t record_seed, DegradationMode m);

/// Modes sorted by formation_order. Fully determined by
/// (policy.global_seed, image_index).
Assignment sample_assignment(const SamplingPolicy& policy, std::uint64_t image_index);

/// Pointwise maximum. Throws InvalidArgument on an empty list and
/// DimensionMismatch on shape disagreement.
SpatialMask compose_masks(std::span<const SpatialMask> masks);

struct ComposedSample {
  ImageBuffer image;
  std::optional<SpatialMask> mask;  // set iff some mode has a spatial footprint
};

/// Applies the assignment in formation order, each mode drawing from
/// mode_stream(seed, mode).
ComposedSample synthesize_assignment(const ImageBuffer& img, const std::optional<DepthMap>& depth,
                                     const Assignment& modes, std::uint64_t seed,
                                     const SeverityMapping& mapping = {});

/// A labelled record for the given modes; output/mask paths follow the
/// dataset layout images/<id>.png and masks/<id>.png.
LabelRecord make_label_record(std::string image_id, std::string source, const Assignment& modes,
                              std::uint64_t seed);

struct SourcePair {
  std::filesystem::path image;
  std::optional<std::filesystem::path> depth;
};

/// Lists *.png / *.ppm images of src_dir in name order and pairs each with
/// the depth file of the same stem (.png or .pgm) in depth_dir when present.
std::vector<SourcePair> discover_sources(const std::filesystem::path& src_dir,
                                         const std::optional<std::filesystem::path>& depth_dir);

struct RecordError {
  std::string image_id;
  std::string source;
  std::string kind;
  std::string message;
};

struct GenerationResult {
  std::vector<LabelRecord> records;  // sorted by image_id
  std::vector<RecordError> errors;   // sorted by image_id
  std::size_t reused = 0;            // records skipped by resume
};

struct GenerateOptions {
  SamplingPolicy policy;
  std::size_t count = 0;  // 0: one record per source; otherwise sources cycle
  int jobs = 1;
  SeverityMapping mapping;
};

/// Writes out_dir/{images,masks}/, manifest.jsonl, errors.jsonl and
/// checksums.txt. Records whose outputs already exist with matching digests
/// are not re-rendered.
GenerationResult generate_dataset(std::span<const SourcePair> sources,
                                  const std::filesystem::path& out_dir,
                                  const GenerateOptions& options);

/// {0.0, 0.1, ..., 1.0}.
std::vector<double> default_severity_grid();

/// One result per grid point, all sharing rng_stream so only severity varies.
std::vector<SynthesisResult> severity_sweep(const ImageBuffer& img,
                                            const std::optional<DepthMap>& depth,
                                            DegradationMode mode, std::span<const double> grid,
                                            std::uint64_t rng_stream,
                                            const SeverityMapping& mapping = {});

struct SweepOptions {
  std::vector<DegradationMode> modes{kAllModes.begin(), kAllModes.end()};
  std::vector<double> grid = default_severity_grid();
  std::uint64_t seed = 0;
  int jobs = 1;
  SeverityMapping mapping;
};

/// Sweep set over every source x mode x grid point. Records carry a sweep
/// tag; ids are sw<source>_<mode>_<grid index>.
GenerationResult generate_sweep_set(std::span<const SourcePair> sources,
                                    const std::filesystem::path& out_dir,
                                    const SweepOptions& options);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace sensorsentry
