// Copyright 2026 The SensorSentry Authors
// SPDX-License-Identifier: Apache-2.0

#include "sensorsentry/labelgen.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>
#include <json.hpp>

#include "sensorsentry/error.hpp"
#include "sensorsentry/gshi.hpp"
#include "sensorsentry/image_io.hpp"
#include "sensorsentry/rng.hpp"

namespace sensorsentry {
namespace {

namespace fs = std::filesystem;

// Channel of the record seed that drives mode/severity sampling; mode ids
// occupy 0..11.
constexpr std::uint64_t kSamplingChannel = 0x53414d50;  // "SAMP"
constexpr std::uint64_t kSweepChannel = 0x53574550;     // "SWEP"

std::string image_rel(const std::string& id) { return "images/" + id + ".png"; }
std::string mask_rel(const std::string& id) { return "masks/" + id + ".png"; }

std::string format_id(const char* fmt, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, n);
  return buf;
}

std::string to_hex(const unsigned char* d, unsigned n) {
  static const char* kHex = "0123456789abcdef";
  std::string s;
  s.reserve(n * 2);
  for (unsigned i = 0; i < n; ++i) {
    s.push_back(kHex[d[i] >> 4]);
    s.push_back(kHex[d[i] & 15]);
  }
  return s;
}

std::string sha256_string(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned n = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &n, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  return to_hex(md, n);
}

// A record to render: its label plus how to produce the pixels.
struct PlannedRecord {
  LabelRecord label;
  std::size_t source_index = 0;
};

struct Outcome {
  std::optional<LabelRecord> record;
  std::optional<RecordError> error;
  bool reused = false;
  std::string checksum_line;
};

struct ChecksumEntry {
  std::string record_digest;
  std::string image_digest;
  std::string mask_digest;
};

std::map<std::string, ChecksumEntry> load_checksums(const fs::path& path) {
  std::map<std::string, ChecksumEntry> out;
  std::ifstream in(path);
  std::string id;
  ChecksumEntry e;
  while (in >> id >> e.record_digest >> e.image_digest >> e.mask_digest) out[id] = e;
  return out;
}

bool outputs_match(const fs::path& out_dir, const LabelRecord& r, const ChecksumEntry& e,
                   const std::string& record_digest) {
  if (e.record_digest != record_digest) return false;
  const fs::path img = out_dir / r.output;
  if (!fs::exists(img) || sha256_file(img) != e.image_digest) return false;
  if (r.mask) {
    const fs::path m = out_dir / *r.mask;
    if (!fs::exists(m) || sha256_file(m) != e.mask_digest) return false;
  } else if (e.mask_digest != "-") {
    return false;
  }
  return true;
}

Outcome render_one(const PlannedRecord& plan, std::span<const SourcePair> sources,
                   const fs::path& out_dir, const SeverityMapping& mapping,
                   const std::map<std::string, ChecksumEntry>& previous) {
  Outcome o;
  const LabelRecord& r = plan.label;
  const std::string record_digest = sha256_string(to_json_line(r));
  auto checksum_line = [&](const LabelRecord& rec) {
    return rec.image_id + " " + record_digest + " " + sha256_file(out_dir / rec.output) + " " +
           (rec.mask ? sha256_file(out_dir / *rec.mask) : std::string("-"));
  };

  if (auto it = previous.find(r.image_id);
      it != previous.end() && outputs_match(out_dir, r, it->second, record_digest)) {
    o.record = r;
    o.reused = true;
    o.checksum_line = r.image_id + " " + it->second.record_digest + " " + it->second.image_digest +
                      " " + it->second.mask_digest;
    return o;
  }

  const SourcePair& src = sources[plan.source_index];
  try {
    const ImageBuffer img = read_image(src.image);
    std::optional<DepthMap> depth;
    if (src.depth) depth = read_depth(*src.depth);
    const ComposedSample sample = synthesize_assignment(img, depth, r.modes, r.seed, mapping);
    write_png(sample.image, out_dir / r.output);
    if (r.mask) {
      if (!sample.mask) throw Error("internal: expected a mask for " + r.image_id);
      write_mask_png(*sample.mask, out_dir / *r.mask);
    }
    o.record = r;
    o.checksum_line = checksum_line(r);
  } catch (const DepthRequired& e) {
    o.error = RecordError{r.image_id, r.source, "depth_required", e.what()};
  } catch (const DimensionMismatch& e) {
    o.error = RecordError{r.image_id, r.source, "dimension_mismatch", e.what()};
  } catch (const DataError& e) {
    o.error = RecordError{r.image_id, r.source, "unreadable_source", e.what()};
  }
  return o;
}

GenerationResult execute(std::vector<PlannedRecord> plans, std::span<const SourcePair> sources,
                         const fs::path& out_dir, const SeverityMapping& mapping, int jobs) {
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "masks");
  const fs::path checksum_path = out_dir / "checksums.txt";
  const auto previous = load_checksums(checksum_path);

  std::vector<Outcome> outcomes(plans.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plans.size()) return;
      try {
        outcomes[i] = render_one(plans[i], sources, out_dir, mapping, previous);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(plans.size());
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(plans.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  GenerationResult result;
  std::vector<std::string> checksum_lines;
  for (auto& o : outcomes) {
    if (o.record) {
      result.records.push_back(std::move(*o.record));
      checksum_lines.push_back(std::move(o.checksum_line));
      if (o.reused) ++result.reused;
    } else if (o.error) {
      spdlog::warn("{}: {} ({})", o.error->image_id, o.error->message, o.error->kind);
      result.errors.push_back(std::move(*o.error));
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.image_id < b.image_id; };
  std::sort(result.records.begin(), result.records.end(), by_id);
  std::sort(result.errors.begin(), result.errors.end(), by_id);
  std::sort(checksum_lines.begin(), checksum_lines.end());

  write_manifest(result.records, out_dir / "manifest.jsonl");
  {
    std::ofstream err(out_dir / "errors.jsonl", std::ios::binary);
    for (const auto& e : result.errors) {
      err << nlohmann::json{{"image_id", e.image_id},
                            {"source", e.source},
                            {"error", e.kind},
                            {"message", e.message}}
                 .dump()
          << "\n";
    }
  }
  {
    std::ofstream sums(checksum_path, std::ios::binary);
    for (const auto& l : checksum_lines) sums << l << "\n";
  }
  spdlog::info("wrote {} records ({} reused, {} errors) to {}", result.records.size(),
               result.reused, result.errors.size(), out_dir.string());
  return result;
}

bool has_image_extension(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".png" || ext == ".ppm" || ext == ".PNG" || ext == ".PPM";
}

}  // namespace

void SamplingPolicy::validate() const {
  if (!(clean_fraction >= 0.0 && clean_fraction <= 1.0)) {
    throw InvalidArgument("clean_fraction must lie in [0,1]");
  }
  if (!(two_mode_fraction >= 0.0 && two_mode_fraction <= 1.0)) {
    throw InvalidArgument("two_mode_fraction must lie in [0,1]");
  }
}

std::uint64_t record_seed(std::uint64_t global_seed, std::uint64_t image_index) {
  return derive_key(global_seed, {image_index});
}

std::uint64_t mode_stream(std::uint64_t seed, DegradationMode m) {
  return derive_key(seed, static_cast<std::uint64_t>(mode_id(m)));
}

Assignment sample_assignment(const SamplingPolicy& policy, std::uint64_t image_index) {
  policy.validate();
  RandomStream rng(derive_key(record_seed(policy.global_seed, image_index), kSamplingChannel));
  const double u = rng.uniform();
  if (u < policy.clean_fraction) return {};
  const bool two = u < policy.clean_fraction + (1.0 - policy.clean_fraction) * policy.two_mode_fraction;

  Assignment out;
  const auto first = mode_from_id(rng.below(kNumModes));
  out.push_back({first, rng.uniform()});
  if (two) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPairAttempts && !placed; ++attempt) {
      const auto m = mode_from_id(rng.below(kNumModes));
      const double s = rng.uniform();
      if (compatible(first, out[0].severity, m, s)) {
        out.push_back({m, s});
        placed = true;
      }
    }
    if (!placed) {
      spdlog::info("image {}: no compatible second mode after {} attempts, using one mode",
                   image_index, kMaxPairAttempts);
    }
  }
  std::sort(out.begin(), out.end(), [](const ModeSeverity& a, const ModeSeverity& b) {
    return formation_order(a.mode) < formation_order(b.mode);
  });
  return out;
}

SpatialMask compose_masks(std::span<const SpatialMask> masks) {
  if (masks.empty()) throw InvalidArgument("compose_masks needs at least one mask");
  std::vector<double> v(masks[0].values().begin(), masks[0].values().end());
  for (std::size_t k = 1; k < masks.size(); ++k) {
    if (!masks[k].same_shape(masks[0])) throw DimensionMismatch("masks differ in shape");
    const auto mv = masks[k].values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i], mv[i]);
  }
  return SpatialMask(masks[0].width(), masks[0].height(), std::move(v));
}

ComposedSample synthesize_assignment(const ImageBuffer& img, const std::optional<DepthMap>& depth,
                                     const Assignment& modes, std::uint64_t seed,
                                     const SeverityMapping& mapping) {
  Assignment ordered = modes;
  std::stable_sort(ordered.begin(), ordered.end(), [](const ModeSeverity& a, const ModeSeverity& b) {
    return formation_order(a.mode) < formation_order(b.mode);
  });
  ComposedSample out{img, std::nullopt};
  std::vector<SpatialMask> masks;
  for (const auto& ms : ordered) {
    SynthesisResult r =
        apply(out.image, depth, DegradationParams{ms.mode, ms.severity, mode_stream(seed, ms.mode)},
              mapping);
    out.image = std::move(r.image);
    if (r.mask_valid && r.mask) masks.push_back(std::move(*r.mask));
  }
  if (!masks.empty()) out.mask = compose_masks(masks);
  return out;
}

LabelRecord make_label_record(std::string image_id, std::string source, const Assignment& modes,
                              std::uint64_t seed) {
  LabelRecord r;
  r.output = image_rel(image_id);
  r.mask_valid = std::any_of(modes.begin(), modes.end(), [](const ModeSeverity& ms) {
    return has_spatial_footprint(ms.mode);
  });
  if (r.mask_valid) r.mask = mask_rel(image_id);
  r.image_id = std::move(image_id);
  r.source = std::move(source);
  r.modes = modes;
  std::array<bool, kNumModes> flags{};
  for (const auto& ms : modes) flags[mode_id(ms.mode)] = true;
  r.presence = PresenceVector::from_flags(flags);
  r.health_target = compute_gshi(r.severities());
  r.regime = classify_regime(r.health_target);
  r.seed = seed;
  return r;
}

std::vector<SourcePair> discover_sources(const fs::path& src_dir,
                                         const std::optional<fs::path>& depth_dir) {
  if (!fs::is_directory(src_dir)) throw DataError("source directory not found: " + src_dir.string());
  if (depth_dir && !fs::is_directory(*depth_dir)) {
    throw DataError("depth directory not found: " + depth_dir->string());
  }
  std::vector<fs::path> images;
  for (const auto& e : fs::directory_iterator(src_dir)) {
    if (e.is_regular_file() && has_image_extension(e.path())) images.push_back(e.path());
  }
  std::sort(images.begin(), images.end());
  std::vector<SourcePair> out;
  for (const auto& p : images) {
    SourcePair sp{p, std::nullopt};
    if (depth_dir) {
      for (const char* ext : {".png", ".pgm"}) {
        const fs::path d = *depth_dir / (p.stem().string() + ext);
        if (fs::exists(d)) {
          sp.depth = d;
          break;
        }
      }
    }
    out.push_back(std::move(sp));
  }
  return out;
}

GenerationResult generate_dataset(std::span<const SourcePair> sources, const fs::path& out_dir,
                                  const GenerateOptions& options) {
  options.policy.validate();
  if (options.jobs < 1) throw InvalidArgument("jobs must be >= 1");
  const std::size_t count = sources.empty() ? 0 : (options.count == 0 ? sources.size() : options.count);
  std::vector<PlannedRecord> plans;
  plans.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t src = i % sources.size();
    plans.push_back({make_label_record(format_id("img_%06zu", i), sources[src].image.generic_string(),
                                       sample_assignment(options.policy, i),
                                       record_seed(options.policy.global_seed, i)),
                     src});
  }
  return execute(std::move(plans), sources, out_dir, options.mapping, options.jobs);
}

std::vector<double> default_severity_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(k / 10.0);
  return g;
}

std::vector<SynthesisResult> severity_sweep(const ImageBuffer& img,
                                            const std::optional<DepthMap>& depth,
                                            DegradationMode mode, std::span<const double> grid,
                                            std::uint64_t rng_stream,
                                            const SeverityMapping& mapping) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw InvalidArgument("grid values must lie in [0,1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw InvalidArgument("grid must be ascending");
  }
  std::vector<SynthesisResult> out;
  out.reserve(grid.size());
  for (double s : grid) out.push_back(apply(img, depth, DegradationParams{mode, s, rng_stream}, mapping));
  return out;
}

GenerationResult generate_sweep_set(std::span<const SourcePair> sources, const fs::path& out_dir,
                                    const SweepOptions& options) {
  if (options.jobs < 1) throw InvalidArgument("jobs must be >= 1");
  const auto& grid = options.grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw InvalidArgument("grid values must lie in [0,1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw InvalidArgument("grid must be ascending");
  }
  std::vector<PlannedRecord> plans;
  for (std::size_t src = 0; src < sources.size(); ++src) {
    for (DegradationMode m : options.modes) {
      // Shared across the grid so only severity varies within a sweep.
      const std::uint64_t seed = derive_key(options.seed, {kSweepChannel, src, mode_id(m)});
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::string id = format_id("sw%04zu_", src) + std::string(mode_name(m)) +
                               format_id("_%02zu", k);
        Assignment modes;
        if (grid[k] > 0.0) modes.push_back({m, grid[k]});
        LabelRecord r = make_label_record(id, sources[src].image.generic_string(), modes, seed);
        r.sweep = SweepTag{m, grid[k]};
        plans.push_back({std::move(r), src});
      }
    }
  }
  return execute(std::move(plans), sources, out_dir, options.mapping, options.jobs);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_string(ss.str());
}

}  // namespace sensorsentry
