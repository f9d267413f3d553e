// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "sensorsentry/error.hpp"
#include "sensorsentry/rng.hpp"

namespace sensorsentry {
namespace {

constexpr double kPi = std::numbers::pi;

// Knob substream indices; frozen so datasets stay reproducible.
enum Knob : std::uint64_t {
  kKnobPrimary = 0,
  kKnobSecondary = 1,
  kKnobNoise = 2,
};

void check_params(const DegradationParams& p, DegradationMode expected) {
  if (p.mode != expected) {
    throw InvalidArgument("operator for '" + std::string(mode_name(expected)) +
                          "' called with mode '" + std::string(mode_name(p.mode)) + "'");
  }
  if (!(p.severity >= 0.0 && p.severity <= 1.0)) {
    throw InvalidArgument("severity must lie in [0,1]");
  }
}

void check_depth(const ImageBuffer& img, const DepthMap& depth) {
  if (!depth.same_shape(img.width(), img.height())) {
    throw DimensionMismatch("depth map is " + std::to_string(depth.width()) + "x" +
                            std::to_string(depth.height()) + ", image is " +
                            std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

SynthesisResult identity_result(const ImageBuffer& img, DegradationMode mode) {
  SynthesisResult r;
  r.image = img;
  r.mask_valid = has_spatial_footprint(mode);
  if (r.mask_valid) r.mask = SpatialMask(img.width(), img.height(), 0.0);
  return r;
}

SpatialMask to_mask(const Plane& p) {
  std::vector<double> v(p.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(p.v[i], 0.0, 1.0);
  return SpatialMask(p.width, p.height, std::move(v));
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double segment_distance(double px, double py, const render::Streak& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (s.x0 + t * dx), py - (s.y0 + t * dy));
}

// Blend every channel toward a target level: I' = I (1 - k) + level k.
void blend_toward(LinearImage& img, double level, double k) {
  for (double& v : img.v) v = v * (1.0 - k) + level * k;
}

void composite_alpha(LinearImage& img, const Plane& alpha, double level) {
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double a = alpha.v[i];
    for (int c = 0; c < 3; ++c) img.v[3 * i + c] = img.v[3 * i + c] * (1.0 - a) + level * a;
  }
}

struct MappingField {
  const char* name;
  double SeverityMapping::*member;
};

constexpr MappingField kMappingFields[] = {
    {"fog_beta", &SeverityMapping::fog_beta},
    {"fog_airlight_min", &SeverityMapping::fog_airlight_min},
    {"fog_airlight_max", &SeverityMapping::fog_airlight_max},
    {"defocus_sigma_max", &SeverityMapping::defocus_sigma_max},
    {"defocus_eps", &SeverityMapping::defocus_eps},
    {"defocus_layers", &SeverityMapping::defocus_layers},
    {"defocus_focal_min", &SeverityMapping::defocus_focal_min},
    {"defocus_focal_max", &SeverityMapping::defocus_focal_max},
    {"motion_length", &SeverityMapping::motion_length},
    {"rain_streaks", &SeverityMapping::rain_streaks},
    {"rain_length_min", &SeverityMapping::rain_length_min},
    {"rain_length_max", &SeverityMapping::rain_length_max},
    {"rain_angle_jitter_deg", &SeverityMapping::rain_angle_jitter_deg},
    {"rain_alpha_min", &SeverityMapping::rain_alpha_min},
    {"rain_alpha_max", &SeverityMapping::rain_alpha_max},
    {"rain_contrast_loss", &SeverityMapping::rain_contrast_loss},
    {"rain_streak_level", &SeverityMapping::rain_streak_level},
    {"snow_particles", &SeverityMapping::snow_particles},
    {"snow_radius_min", &SeverityMapping::snow_radius_min},
    {"snow_radius_max", &SeverityMapping::snow_radius_max},
    {"snow_alpha_min", &SeverityMapping::snow_alpha_min},
    {"snow_alpha_max", &SeverityMapping::snow_alpha_max},
    {"snow_whiteout", &SeverityMapping::snow_whiteout},
    {"low_light_gamma", &SeverityMapping::low_light_gamma},
    {"low_light_read_noise", &SeverityMapping::low_light_read_noise},
    {"low_light_read_noise_slope", &SeverityMapping::low_light_read_noise_slope},
    {"exposure_under", &SeverityMapping::exposure_under},
    {"exposure_over", &SeverityMapping::exposure_over},
    {"noise_shot_gain", &SeverityMapping::noise_shot_gain},
    {"noise_read", &SeverityMapping::noise_read},
    {"noise_read_slope", &SeverityMapping::noise_read_slope},
    {"jpeg_quality_max", &SeverityMapping::jpeg_quality_max},
    {"jpeg_quality_span", &SeverityMapping::jpeg_quality_span},
    {"glare_radius", &SeverityMapping::glare_radius},
    {"glare_radius_slope", &SeverityMapping::glare_radius_slope},
    {"glare_gain", &SeverityMapping::glare_gain},
    {"occlusion_coverage", &SeverityMapping::occlusion_coverage},
    {"occlusion_coverage_slope", &SeverityMapping::occlusion_coverage_slope},
    {"occlusion_blend", &SeverityMapping::occlusion_blend},
};

}  // namespace

std::optional<double> SynthesisResult::knob(std::string_view name) const {
  for (const auto& [k, v] : knobs) {
    if (k == name) return v;
  }
  return std::nullopt;
}

SeverityMapping parse_severity_mapping(std::string_view text, const SeverityMapping& base) {
  SeverityMapping m = base;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("severity mapping line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    const double value = parse_double(line.substr(eq + 1));
    bool found = false;
    for (const auto& f : kMappingFields) {
      if (key == f.name) {
        m.*(f.member) = value;
        found = true;
      }
    }
    if (!found) throw DataError("unknown severity mapping key '" + key + "'");
  }
  return m;
}

std::string serialize_severity_mapping(const SeverityMapping& mapping) {
  std::string out;
  for (const auto& f : kMappingFields) {
    out += f.name;
    out += " = ";
    out += format_double(mapping.*(f.member));
    out += "\n";
  }
  return out;
}

double fog_beta(double s, const SeverityMapping& m) { return m.fog_beta * s; }
double defocus_sigma_max(double s, const SeverityMapping& m) { return m.defocus_sigma_max * s; }
int motion_length(double s, const SeverityMapping& m) {
  return 1 + static_cast<int>(std::lround(m.motion_length * s));
}
int rain_streak_count(double s, const SeverityMapping& m) {
  return static_cast<int>(std::lround(m.rain_streaks * s));
}
int snow_particle_count(double s, const SeverityMapping& m) {
  return static_cast<int>(std::lround(m.snow_particles * s));
}
int jpeg_quality(double s, const SeverityMapping& m) {
  const auto q = std::lround(m.jpeg_quality_max - m.jpeg_quality_span * s);
  return static_cast<int>(std::clamp<long>(q, 1, 100));
}
double occlusion_coverage(double s, const SeverityMapping& m) {
  return std::clamp(m.occlusion_coverage + m.occlusion_coverage_slope * s, 0.0, 1.0);
}

namespace render {

Plane fog_transmission(const DepthMap& depth, double beta) {
  Plane t(depth.width(), depth.height());
  const auto d = depth.values();
  for (std::size_t i = 0; i < t.v.size(); ++i) t.v[i] = std::exp(-beta * d[i]);
  return t;
}

LinearImage fog(const LinearImage& img, const Plane& transmission, double airlight_level) {
  LinearImage out = img;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double t = transmission.v[i];
    for (int c = 0; c < 3; ++c) {
      out.v[3 * i + c] = img.v[3 * i + c] * t + airlight_level * (1.0 - t);
    }
  }
  return out;
}

Plane defocus_sigma(const DepthMap& depth, double sigma_max, double focal_depth, double eps) {
  Plane coc(depth.width(), depth.height());
  const auto d = depth.values();
  const double focal_term = 1.0 / (focal_depth + eps);
  double max_coc = 0.0;
  for (std::size_t i = 0; i < coc.v.size(); ++i) {
    coc.v[i] = std::abs(1.0 / (d[i] + eps) - focal_term);
    max_coc = std::max(max_coc, coc.v[i]);
  }
  for (double& c : coc.v) c = max_coc > 0.0 ? sigma_max * c / max_coc : 0.0;
  return coc;
}

LinearImage layered_defocus(const LinearImage& img, const Plane& sigma, double sigma_max,
                            int layers) {
  if (!(sigma_max > 0.0) || layers < 2) return img;
  std::vector<LinearImage> blurred;
  blurred.reserve(layers);
  for (int k = 0; k < layers; ++k) {
    const double layer_sigma = sigma_max * k / (layers - 1);
    blurred.push_back(k == 0 ? img : gaussian_blur(img, layer_sigma));
  }
  LinearImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double pos = sigma.v[i] / sigma_max * (layers - 1);
    const int k = std::clamp(static_cast<int>(std::lround(pos)), 0, layers - 1);
    for (int c = 0; c < 3; ++c) out.v[3 * i + c] = blurred[k].v[3 * i + c];
  }
  return out;
}

Kernel2D motion_psf(int length, double theta) {
  length = std::max(length, 1);
  const int radius = (length - 1) / 2 + 1;
  Kernel2D k;
  k.size = 2 * radius + 1;
  k.w.assign(static_cast<std::size_t>(k.size) * k.size, 0.0);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // One unit-weight sample per pixel of trajectory, splatted bilinearly.
  for (int j = 0; j < length; ++j) {
    const double t = j - (length - 1) / 2.0;
    const double fx = t * c + radius;
    const double fy = t * s + radius;
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double ax = fx - x0;
    const double ay = fy - y0;
    const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int q = 0; q < 4; ++q) {
      if (wts[q] <= 1e-12) continue;
      const int xi = std::clamp(xs[q], 0, k.size - 1);
      const int yi = std::clamp(ys[q], 0, k.size - 1);
      k.w[static_cast<std::size_t>(yi) * k.size + xi] += wts[q];
    }
  }
  double sum = 0.0;
  for (double w : k.w) sum += w;
  for (double& w : k.w) w /= sum;
  return k;
}

std::vector<Streak> plan_rain(int width, int height, double severity, std::uint64_t stream,
                              const SeverityMapping& m) {
  RandomStream rng = RandomStream(stream).substream(kKnobPrimary);
  const int n = rain_streak_count(severity, m);
  std::vector<Streak> streaks;
  streaks.reserve(n);
  const double jitter = m.rain_angle_jitter_deg * kPi / 180.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, width);
    const double y = rng.uniform(0.0, height);
    const double len = rng.uniform(m.rain_length_min, m.rain_length_max);
    const double angle = rng.uniform(-jitter, jitter);  // from vertical
    const double alpha = rng.uniform(m.rain_alpha_min, m.rain_alpha_max);
    const double dx = 0.5 * len * std::sin(angle);
    const double dy = 0.5 * len * std::cos(angle);
    streaks.push_back({x - dx, y - dy, x + dx, y + dy, alpha});
  }
  return streaks;
}

std::vector<Particle> plan_snow(int width, int height, double severity, std::uint64_t stream,
                                const SeverityMapping& m) {
  RandomStream rng = RandomStream(stream).substream(kKnobPrimary);
  const int n = snow_particle_count(severity, m);
  std::vector<Particle> particles;
  particles.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, width);
    const double y = rng.uniform(0.0, height);
    const double r = rng.uniform(m.snow_radius_min, m.snow_radius_max);
    const double a = rng.uniform(m.snow_alpha_min, m.snow_alpha_max);
    particles.push_back({x, y, r, a});
  }
  return particles;
}

}  // namespace render

SynthesisResult apply_fog(const ImageBuffer& img, const DepthMap& depth,
                          const DegradationParams& p, const SeverityMapping& m) {
  check_params(p, DegradationMode::Fog);
  check_depth(img, depth);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream rng = RandomStream(p.rng_stream).substream(kKnobPrimary);
  const double airlight = rng.uniform(m.fog_airlight_min, m.fog_airlight_max);
  const Plane t = render::fog_transmission(depth, fog_beta(p.severity, m));

  SynthesisResult r;
  r.image = quantize(render::fog(to_linear(img), t, airlight * 255.0));
  Plane mask(t.width, t.height);
  for (std::size_t i = 0; i < t.v.size(); ++i) mask.v[i] = 1.0 - t.v[i];
  r.mask = to_mask(mask);
  r.mask_valid = true;
  r.knobs = {{"beta", fog_beta(p.severity, m)}, {"airlight", airlight}};
  return r;
}

SynthesisResult apply_defocus(const ImageBuffer& img, const DepthMap& depth,
                              const DegradationParams& p, const SeverityMapping& m) {
  check_params(p, DegradationMode::DefocusBlur);
  check_depth(img, depth);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream rng = RandomStream(p.rng_stream).substream(kKnobPrimary);
  const double focal = rng.uniform(m.defocus_focal_min, m.defocus_focal_max);
  const double smax = defocus_sigma_max(p.severity, m);
  const Plane sigma = render::defocus_sigma(depth, smax, focal, m.defocus_eps);
  const int layers = static_cast<int>(std::lround(m.defocus_layers));

  SynthesisResult r;
  r.image = quantize(render::layered_defocus(to_linear(img), sigma, smax, layers));
  Plane mask(sigma.width, sigma.height);
  for (std::size_t i = 0; i < sigma.v.size(); ++i) mask.v[i] = sigma.v[i] / smax;
  r.mask = to_mask(mask);
  r.mask_valid = true;
  r.knobs = {{"focal_depth", focal}, {"sigma_max", smax}};
  return r;
}

SynthesisResult apply_motion_blur(const ImageBuffer& img, const DegradationParams& p,
                                  const SeverityMapping& m) {
  check_params(p, DegradationMode::MotionBlur);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream rng = RandomStream(p.rng_stream).substream(kKnobPrimary);
  const double theta = rng.uniform(0.0, kPi);
  const int length = motion_length(p.severity, m);

  SynthesisResult r;
  r.image = quantize(convolve(to_linear(img), render::motion_psf(length, theta)));
  r.knobs = {{"length", static_cast<double>(length)}, {"theta", theta}};
  return r;
}

SynthesisResult apply_rain(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m) {
  check_params(p, DegradationMode::Rain);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int w = img.width();
  const int h = img.height();
  LinearImage lin = to_linear(img);
  double mean = 0.0;
  for (double v : lin.v) mean += v;
  mean /= static_cast<double>(lin.v.size());
  blend_toward(lin, mean, m.rain_contrast_loss * p.severity);

  const auto streaks = render::plan_rain(w, h, p.severity, p.rng_stream, m);
  Plane alpha(w, h);
  for (const auto& s : streaks) {
    const int x_lo = std::max(0, static_cast<int>(std::floor(std::min(s.x0, s.x1))) - 1);
    const int x_hi = std::min(w - 1, static_cast<int>(std::ceil(std::max(s.x0, s.x1))) + 1);
    const int y_lo = std::max(0, static_cast<int>(std::floor(std::min(s.y0, s.y1))) - 1);
    const int y_hi = std::min(h - 1, static_cast<int>(std::ceil(std::max(s.y0, s.y1))) + 1);
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double cover = 1.0 - segment_distance(x, y, s);
        if (cover > 0.0) alpha(x, y) += s.alpha * cover;
      }
    }
  }
  for (double& a : alpha.v) a = std::min(a, 1.0);
  composite_alpha(lin, alpha, m.rain_streak_level);

  SynthesisResult r;
  r.image = quantize(lin);
  r.mask = to_mask(alpha);
  r.mask_valid = true;
  r.knobs = {{"streaks", static_cast<double>(streaks.size())}};
  return r;
}

SynthesisResult apply_snow(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m) {
  check_params(p, DegradationMode::Snow);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int w = img.width();
  const int h = img.height();
  LinearImage lin = to_linear(img);
  blend_toward(lin, 255.0, m.snow_whiteout * p.severity);

  const auto particles = render::plan_snow(w, h, p.severity, p.rng_stream, m);
  Plane alpha(w, h);
  for (const auto& q : particles) {
    const double sigma = 0.5 * q.radius;
    const int reach = static_cast<int>(std::ceil(q.radius + 1.0));
    const int cx = static_cast<int>(std::floor(q.x));
    const int cy = static_cast<int>(std::floor(q.y));
    for (int y = std::max(0, cy - reach); y <= std::min(h - 1, cy + reach); ++y) {
      for (int x = std::max(0, cx - reach); x <= std::min(w - 1, cx + reach); ++x) {
        const double dx = x + 0.5 - q.x;
        const double dy = y + 0.5 - q.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 > (q.radius + 1.0) * (q.radius + 1.0)) continue;
        alpha(x, y) += q.alpha * std::exp(-d2 / (2.0 * sigma * sigma));
      }
    }
  }
  for (double& a : alpha.v) a = std::min(a, 1.0);
  composite_alpha(lin, alpha, 255.0);

  SynthesisResult r;
  r.image = quantize(lin);
  r.mask = to_mask(alpha);
  r.mask_valid = true;
  r.knobs = {{"particles", static_cast<double>(particles.size())}};
  return r;
}

SynthesisResult apply_low_light(const ImageBuffer& img, const DegradationParams& p,
                                const SeverityMapping& m) {
  check_params(p, DegradationMode::LowLight);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream noise = RandomStream(p.rng_stream).substream(kKnobNoise);
  const double gamma = 1.0 + m.low_light_gamma * p.severity;
  const double read_sigma = m.low_light_read_noise + m.low_light_read_noise_slope * p.severity;
  LinearImage lin = to_linear(img);
  for (double& v : lin.v) v = 255.0 * std::pow(v / 255.0, gamma) + read_sigma * noise.normal();

  SynthesisResult r;
  r.image = quantize(lin);
  r.knobs = {{"gamma", gamma}, {"read_sigma", read_sigma}};
  return r;
}

SynthesisResult apply_exposure_shift(const ImageBuffer& img, const DegradationParams& p,
                                     const SeverityMapping& m) {
  check_params(p, DegradationMode::ExposureShift);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream rng = RandomStream(p.rng_stream).substream(kKnobPrimary);
  const bool over = rng.bit();
  const double gain = over ? 1.0 + m.exposure_over * p.severity : 1.0 - m.exposure_under * p.severity;
  LinearImage lin = to_linear(img);
  for (double& v : lin.v) v *= gain;

  SynthesisResult r;
  r.image = quantize(lin);
  r.knobs = {{"overexposed", over ? 1.0 : 0.0}, {"gain", gain}};
  return r;
}

SynthesisResult apply_sensor_noise(const ImageBuffer& img, const DegradationParams& p,
                                   const SeverityMapping& m) {
  check_params(p, DegradationMode::SensorNoise);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  RandomStream noise = RandomStream(p.rng_stream).substream(kKnobNoise);
  const double shot_gain = m.noise_shot_gain * p.severity;
  const double read_sigma = m.noise_read + m.noise_read_slope * p.severity;
  LinearImage lin = to_linear(img);
  for (double& v : lin.v) {
    const double shot_sigma = shot_gain * std::sqrt(v / 255.0) * 255.0;
    const double shot = shot_sigma * noise.normal();
    const double read = read_sigma * noise.normal();
    v += shot + read;
  }

  SynthesisResult r;
  r.image = quantize(lin);
  r.knobs = {{"shot_gain", shot_gain}, {"read_sigma", read_sigma}};
  return r;
}

SynthesisResult apply_jpeg(const ImageBuffer& img, const DegradationParams& p,
                           const SeverityMapping& m) {
  check_params(p, DegradationMode::JpegCompression);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int quality = jpeg_quality(p.severity, m);
  SynthesisResult r;
  r.image = render::jpeg_round_trip(img, quality);
  r.knobs = {{"jpeg_quality", static_cast<double>(quality)}};
  return r;
}

SynthesisResult apply_vignetting(const ImageBuffer& img, const DegradationParams& p,
                                 const SeverityMapping&) {
  check_params(p, DegradationMode::Vignetting);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int w = img.width();
  const int h = img.height();
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double r_max = std::hypot(cx, cy);
  LinearImage lin = to_linear(img);
  Plane mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double rho = r_max > 0.0 ? std::hypot(x - cx, y - cy) / r_max : 0.0;
      const double attenuation = p.severity * rho * rho;
      mask(x, y) = attenuation;
      for (int c = 0; c < 3; ++c) lin.at(x, y, c) *= 1.0 - attenuation;
    }
  }
  SynthesisResult r;
  r.image = quantize(lin);
  r.mask = to_mask(mask);
  r.mask_valid = true;
  return r;
}

SynthesisResult apply_glare(const ImageBuffer& img, const DegradationParams& p,
                            const SeverityMapping& m) {
  check_params(p, DegradationMode::Glare);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int w = img.width();
  const int h = img.height();
  RandomStream pos = RandomStream(p.rng_stream).substream(kKnobPrimary);
  const double sx = pos.uniform(0.1, 0.9) * w;
  const double sy = pos.uniform(0.05, 0.5) * h;
  RandomStream orient = RandomStream(p.rng_stream).substream(kKnobSecondary);
  const double theta0 = orient.uniform(0.0, kPi / 2.0);

  const double radius = m.glare_radius + m.glare_radius_slope * p.severity;
  const double bloom_sigma = radius / 3.0;
  const double halo_radius = 0.8 * radius;
  const double halo_width = 0.08 * radius;
  const double streak_decay = 0.9 * radius;

  Plane field(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = x - sx;
      const double dy = y - sy;
      const double d = std::hypot(dx, dy);
      double e = std::exp(-d * d / (2.0 * bloom_sigma * bloom_sigma));
      e += 0.35 * std::exp(-(d - halo_radius) * (d - halo_radius) / (2.0 * halo_width * halo_width));
      for (int k = 0; k < 4; ++k) {
        const double a = theta0 + k * kPi / 2.0;
        const double along = dx * std::cos(a) + dy * std::sin(a);
        if (along < 0.0) continue;
        const double across = -dx * std::sin(a) + dy * std::cos(a);
        e += 0.5 * std::exp(-across * across / 2.0) * std::exp(-along / streak_decay);
      }
      field(x, y) = std::min(e, 1.0);
    }
  }

  LinearImage lin = to_linear(img);
  Plane mask(w, h);
  const double gain = m.glare_gain * p.severity * 255.0;
  for (std::size_t i = 0; i < field.v.size(); ++i) {
    mask.v[i] = p.severity * field.v[i];
    for (int c = 0; c < 3; ++c) lin.v[3 * i + c] += gain * field.v[i];
  }
  SynthesisResult r;
  r.image = quantize(lin);
  r.mask = to_mask(mask);
  r.mask_valid = true;
  r.knobs = {{"source_x", sx}, {"source_y", sy}, {"radius", radius}, {"streak_angle", theta0}};
  return r;
}

SynthesisResult apply_lens_occlusion(const ImageBuffer& img, const DegradationParams& p,
                                     const SeverityMapping& m) {
  check_params(p, DegradationMode::LensOcclusion);
  if (p.severity == 0.0) return identity_result(img, p.mode);

  const int w = img.width();
  const int h = img.height();
  const double base = std::min(w, h);
  RandomStream rng = RandomStream(p.rng_stream).substream(kKnobPrimary);
  struct Blob {
    double cx, cy, a, b, cos_t, sin_t;
  };
  const int count = 1 + static_cast<int>(rng.below(3));
  std::vector<Blob> blobs;
  for (int i = 0; i < count; ++i) {
    const double cx = rng.uniform(0.15, 0.85) * w;
    const double cy = rng.uniform(0.15, 0.85) * h;
    const double a = rng.uniform(0.6, 1.0) * base;
    const double b = rng.uniform(0.6, 1.0) * base;
    const double t = rng.uniform(0.0, kPi);
    blobs.push_back({cx, cy, a, b, std::cos(t), std::sin(t)});
  }

  // Blob distances scale as 1/scale, so the soft union at any scale follows
  // from the nearest normalized blob distance at scale 1.
  std::vector<double> nearest(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dmin = std::numeric_limits<double>::infinity();
      for (const auto& bl : blobs) {
        const double dx = x + 0.5 - bl.cx;
        const double dy = y + 0.5 - bl.cy;
        const double u = (dx * bl.cos_t + dy * bl.sin_t) / bl.a;
        const double v = (-dx * bl.sin_t + dy * bl.cos_t) / bl.b;
        dmin = std::min(dmin, std::sqrt(u * u + v * v));
      }
      nearest[static_cast<std::size_t>(y) * w + x] = dmin;
    }
  }
  // Mean soft-union alpha at a given blob scale, optionally rasterized.
  auto alpha_at = [&](Plane* dst, double scale) {
    double total = 0.0;
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      const double alpha = 1.0 - smoothstep(0.6, 1.0, nearest[i] / scale);
      if (dst) dst->v[i] = alpha;
      total += alpha;
    }
    return total / (static_cast<double>(w) * h);
  };

  // Bisection on a common blob scale so the soft union covers the target
  // fraction of the frame.
  const double target = occlusion_coverage(p.severity, m);
  double lo = 0.0;
  double hi = 0.25;
  while (alpha_at(nullptr, hi) < target && hi < 64.0) hi *= 2.0;
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (alpha_at(nullptr, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  Plane alpha(w, h);
  const double coverage = alpha_at(&alpha, hi);

  const LinearImage lin = to_linear(img);
  const LinearImage blurred = gaussian_blur(lin, 3.0 + 0.05 * std::max(w, h));
  LinearImage out(w, h);
  for (std::size_t i = 0; i < alpha.v.size(); ++i) {
    const double k = m.occlusion_blend * alpha.v[i];
    for (int c = 0; c < 3; ++c) {
      out.v[3 * i + c] = lin.v[3 * i + c] * (1.0 - k) + blurred.v[3 * i + c] * k;
    }
  }
  SynthesisResult r;
  r.image = quantize(out);
  r.mask = to_mask(alpha);
  r.mask_valid = true;
  r.knobs = {{"blobs", static_cast<double>(count)}, {"coverage", coverage}};
  return r;
}

SynthesisResult apply(const ImageBuffer& img, const DegradationParams& p,
                      const SeverityMapping& m) {
  return apply(img, std::optional<DepthMap>{}, p, m);
}

SynthesisResult apply(const ImageBuffer& img, const DepthMap& depth, const DegradationParams& p,
                      const SeverityMapping& m) {
  using M = DegradationMode;
  switch (p.mode) {
    case M::Fog:
      return apply_fog(img, depth, p, m);
    case M::DefocusBlur:
      return apply_defocus(img, depth, p, m);
    case M::Rain:
      return apply_rain(img, p, m);
    case M::Snow:
      return apply_snow(img, p, m);
    case M::LowLight:
      return apply_low_light(img, p, m);
    case M::MotionBlur:
      return apply_motion_blur(img, p, m);
    case M::Glare:
      return apply_glare(img, p, m);
    case M::Vignetting:
      return apply_vignetting(img, p, m);
    case M::SensorNoise:
      return apply_sensor_noise(img, p, m);
    case M::ExposureShift:
      return apply_exposure_shift(img, p, m);
    case M::JpegCompression:
      return apply_jpeg(img, p, m);
    case M::LensOcclusion:
      return apply_lens_occlusion(img, p, m);
  }
  throw InvalidArgument("unknown degradation mode");
}

SynthesisResult apply(const ImageBuffer& img, const std::optional<DepthMap>& depth,
                      const DegradationParams& p, const SeverityMapping& m) {
  if (depth) return apply(img, *depth, p, m);
  if (p.mode == DegradationMode::Fog || p.mode == DegradationMode::DefocusBlur) {
    throw DepthRequired(std::string(mode_name(p.mode)));
  }
  // Depth-free modes never read the depth argument.
  static const DepthMap kUnused(1, 1, 0.0);
  return apply(img, kUnused, p, m);
}

bool compatible(DegradationMode a, double sa, DegradationMode b, double sb) {
  using M = DegradationMode;
  if (a == b) return false;
  const double lo = std::min(sa, sb);
  const auto pair_is = [&](M x, M y) { return (a == x && b == y) || (a == y && b == x); };
  if (pair_is(M::Rain, M::Snow) && lo > 0.3) return false;
  if (pair_is(M::Glare, M::LowLight) && lo > 0.5) return false;
  return true;
}

int formation_order(DegradationMode m) {
  using M = DegradationMode;
  switch (m) {
    case M::Fog:
      return 0;
    case M::Rain:
      return 1;
    case M::Snow:
      return 2;
    case M::LowLight:
      return 3;
    case M::Glare:
      return 4;
    case M::LensOcclusion:
      return 5;
    case M::DefocusBlur:
      return 6;
    case M::Vignetting:
      return 7;
    case M::MotionBlur:
      return 8;
    case M::ExposureShift:
      return 9;
    case M::SensorNoise:
      return 10;
    case M::JpegCompression:
      return 11;
  }
  return 12;
}

}  // namespace sensorsentry
