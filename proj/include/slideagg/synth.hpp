#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "slideagg/ingest.hpp"

namespace slideagg {

inline constexpr int kPatchSize = 100;  // pixels; patch centers sit at 100 * i + 50

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct SynthConfig {
  int slides_per_label = 100;
  int grid_extent = 20;  // tissue is a grid_extent x grid_extent block of patches
  int blobs_min = 1;
  int blobs_max = 3;
  double blob_radius_min = 2.0;  // in patches
  double blob_radius_max = 5.0;
  // Mean chance that a non-tumour patch comes out malignant-classified, on any
  // slide. Each slide draws its own rate uniformly around this mean.
  double noise_rate = 0.02;
  // Tumour patches draw from this Beta restricted to [0.5, 1].
  BetaParams tumor_confidence{8.0, 2.0};
  // False positives draw 0.5 + 0.5 * Beta(alpha, beta).
  BetaParams false_positive_confidence{2.0, 2.0};
  std::uint64_t seed = 0;

  // Throws InvalidConfig.
  void validate() const;
};

/// One slide. Malignant slides get blobs_min..blobs_max disc-shaped tumours;
/// every other patch is either a false positive (at the slide's own rate,
/// drawn with mean noise_rate) or a benign
/// patch with prob_malignant uniform in [0, 0.5). Randomness comes from
/// derive_seed(cfg.seed, "slide/<label>/<index>").
SlideRecord generate_slide(const SynthConfig& cfg, Label label, int index);

// Malignant slides first, then normal, ids "malignant_NNN" / "normal_NNN".
std::vector<SlideRecord> generate_dataset(const SynthConfig& cfg);

// Writes <dir>/manifest.csv and <dir>/slides/<id>.csv; returns the manifest
// with paths resolved against `dir`.
DatasetManifest write_dataset(const std::vector<SlideRecord>& slides, const std::filesystem::path& dir);

}  // namespace slideagg
