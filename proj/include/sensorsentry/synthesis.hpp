// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

/// @file synthesis.hpp
/// @brief Severity-controlled camera degradation operators.
///
/// Each operator maps (image, severity, rng stream) to a degraded image and,
/// for modes with a spatial footprint, a ground-truth mask. Stochastic knobs
/// (air light, focal plane, blur angle, flare position, ...) are drawn from
/// numbered substreams of the params' rng stream, so equal inputs give
/// byte-identical outputs. Severity 0 returns the input unchanged for every
/// mode. All compositing happens in 64-bit reals with one final quantization.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sensorsentry/core.hpp"
#include "sensorsentry/filters.hpp"
#include "sensorsentry/raster.hpp"

namespace sensorsentry {

struct DegradationParams {
  DegradationMode mode = DegradationMode::Fog;
  double severity = 0.0;
  std::uint64_t rng_stream = 0;
};

struct SynthesisResult {
  ImageBuffer image;
  std::optional<SpatialMask> mask;
  bool mask_valid = false;
  /// Drawn knob values in draw order (e.g. "airlight", "jpeg_quality").
  std::vector<std::pair<std::string, double>> knobs;

  std::optional<double> knob(std::string_view name) const;
};

/// Severity-to-physics constants. Every operator reads its mapping from here;
/// a key = value file can override any field (see parse_severity_mapping).
struct SeverityMapping {
  double fog_beta = 4.0;  // beta(s) = fog_beta * s
  double fog_airlight_min = 0.8;
  double fog_airlight_max = 1.0;

  double defocus_sigma_max = 8.0;  // px at s = 1
  double defocus_eps = 0.05;
  double defocus_layers = 4;
  double defocus_focal_min = 0.2;
  double defocus_focal_max = 0.8;

  double motion_length = 30.0;  // L(s) = 1 + round(motion_length * s)

  double rain_streaks = 400;
  double rain_length_min = 8;
  double rain_length_max = 24;
  double rain_angle_jitter_deg = 15;
  double rain_alpha_min = 0.25;
  double rain_alpha_max = 0.5;
  double rain_contrast_loss = 0.15;
  double rain_streak_level = 230;

  double snow_particles = 600;
  double snow_radius_min = 1;
  double snow_radius_max = 3;
  double snow_alpha_min = 0.6;
  double snow_alpha_max = 1.0;
  double snow_whiteout = 0.25;

  double low_light_gamma = 2.0;  // exponent 1 + gamma * s
  double low_light_read_noise = 2.0;
  double low_light_read_noise_slope = 10.0;

  double exposure_under = 0.8;  // g = 1 - under * s
  double exposure_over = 1.5;   // g = 1 + over * s

  double noise_shot_gain = 0.12;
  double noise_read = 1.0;
  double noise_read_slope = 6.0;

  double jpeg_quality_max = 95;
  double jpeg_quality_span = 85;

  double glare_radius = 40;
  double glare_radius_slope = 80;
  double glare_gain = 1.5;

  double occlusion_coverage = 0.05;
  double occlusion_coverage_slope = 0.35;
  double occlusion_blend = 0.8;
};

SeverityMapping parse_severity_mapping(std::string_view text,
                                       const SeverityMapping& base = SeverityMapping{});
std::string serialize_severity_mapping(const SeverityMapping& mapping);

// Severity mappings, exposed for tests and provenance logs.
double fog_beta(double s, const SeverityMapping& m = {});
double defocus_sigma_max(double s, const SeverityMapping& m = {});
int motion_length(double s, const SeverityMapping& m = {});
int rain_streak_count(double s, const SeverityMapping& m = {});
int snow_particle_count(double s, const SeverityMapping& m = {});
int jpeg_quality(double s, const SeverityMapping& m = {});
double occlusion_coverage(double s, const SeverityMapping& m = {});

// Per-mode operators. Fog and defocus need depth with the image's shape.
SynthesisResult apply_fog(const ImageBuffer& img, const DepthMap& depth,
                          const DegradationParams& p, const SeverityMapping& m = {});
SynthesisResult apply_defocus(const ImageBuffer& img, const DepthMap& depth,
                              const DegradationParams& p, const SeverityMapping& m = {});
SynthesisResult apply_motion_blur(const ImageBuffer& img, const DegradationParams& p,
                                  const SeverityMapping& m = {});
SynthesisResult apply_rain(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m = {});
SynthesisResult apply_snow(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m = {});
SynthesisResult apply_low_light(const ImageBuffer& img, const DegradationParams& p,
                                const SeverityMapping& m = {});
SynthesisResult apply_exposure_shift(const ImageBuffer& img, const DegradationParams& p,
                                     const SeverityMapping& m = {});
SynthesisResult apply_sensor_noise(const ImageBuffer& img, const DegradationParams& p,
                                   const SeverityMapping& m = {});
SynthesisResult apply_jpeg(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m = {});
SynthesisResult apply_vignetting(const ImageBuffer& img, const DegradationParams& p,
                                 const SeverityMapping& m = {});
SynthesisResult apply_glare(const ImageBuffer& img, const DegradationParams& p,
                            const SeverityMapping& m = {});
SynthesisResult apply_lens_occlusion(const ImageBuffer& img, const DegradationParams& p,
                                     const SeverityMapping& m = {});

/// Dispatch by mode. Throws DepthRequired for fog/defocus without depth.
SynthesisResult apply(const ImageBuffer& img, const DegradationParams& p,
                      const SeverityMapping& m = {});
SynthesisResult apply(const ImageBuffer& img, const DepthMap& depth, const DegradationParams& p,
                      const SeverityMapping& m = {});
SynthesisResult apply(const ImageBuffer& img, const std::optional<DepthMap>& depth,
                      const DegradationParams& p, const SeverityMapping& m = {});

/// Whether two modes may be co-applied: never a mode with itself, never
/// heavy rain with heavy snow (both > 0.3), never strong glare with strong
/// low light (both > 0.5).
bool compatible(DegradationMode a, double sa, DegradationMode b, double sb);

/// Position in the image-formation chain used to order two-mode samples:
/// atmosphere, illumination, lens, motion, sensor, codec.
int formation_order(DegradationMode m);

namespace render {

// Deterministic renderers with explicit knobs; the apply_* operators draw the
// knobs and delegate here.

/// Returns the transmission map t(x) = exp(-beta * depth(x)).
Plane fog_transmission(const DepthMap& depth, double beta);
LinearImage fog(const LinearImage& img, const Plane& transmission, double airlight_level);

/// sigma(x) map in px from the circle-of-confusion proxy.
Plane defocus_sigma(const DepthMap& depth, double sigma_max, double focal_depth, double eps);
LinearImage layered_defocus(const LinearImage& img, const Plane& sigma, double sigma_max,
                            int layers);

/// Normalized linear-trajectory PSF of the given length (px) and angle (rad).
Kernel2D motion_psf(int length, double theta);

LinearImage jpeg_round_trip(const LinearImage& img, int quality);
ImageBuffer jpeg_round_trip(const ImageBuffer& img, int quality);

struct Streak {
  double x0, y0, x1, y1, alpha;
};
struct Particle {
  double x, y, radius, alpha;
};
std::vector<Streak> plan_rain(int width, int height, double severity, std::uint64_t stream,
                              const SeverityMapping& m = {});
std::vector<Particle> plan_snow(int width, int height, double severity, std::uint64_t stream,
                                const SeverityMapping& m = {});

}  // namespace render

}  // namespace sensorsentry
