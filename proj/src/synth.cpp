#include "slideagg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "slideagg/errors.hpp"
#include "slideagg/seeds.hpp"

namespace slideagg {

namespace {

double sample_beta(std::mt19937_64& rng, const BetaParams& p) {
  std::gamma_distribution<double> ga(p.alpha, 1.0);
  std::gamma_distribution<double> gb(p.beta, 1.0);
  const double a = ga(rng);
  const double b = gb(rng);
  return a / (a + b);
}

std::string slide_name(Label label, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d", label == Label::Malignant ? "malignant" : "normal", index);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::InvalidConfig, msg); };
  if (slides_per_label < 0) fail("slides_per_label must be >= 0");
  if (grid_extent < 1) fail("grid_extent must be >= 1");
  if (blobs_min < 1 || blobs_max < blobs_min) fail("blob count range must satisfy 1 <= min <= max");
  if (!(blob_radius_min >= 0.0) || !(blob_radius_max >= blob_radius_min) || !std::isfinite(blob_radius_max))
    fail("blob radius range must satisfy 0 <= min <= max");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) fail("noise_rate must lie in [0, 1]");
  for (const auto& b : {tumor_confidence, false_positive_confidence})
    if (!(b.alpha > 0.0) || !(b.beta > 0.0) || !std::isfinite(b.alpha) || !std::isfinite(b.beta))
      fail("beta parameters must be finite and positive");
}

SlideRecord generate_slide(const SynthConfig& cfg, Label label, int index) {
  cfg.validate();
  SlideRecord slide{slide_name(label, index), label, {}};
  std::mt19937_64 rng(derive_seed(cfg.seed, "slide/" + std::string(to_string(label)) + "/" + std::to_string(index)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = cfg.grid_extent;

  std::vector<char> tumour(static_cast<std::size_t>(n) * n, 0);
  if (label == Label::Malignant) {
    std::uniform_int_distribution<int> count(cfg.blobs_min, cfg.blobs_max);
    std::uniform_int_distribution<int> cell(0, n - 1);
    std::uniform_real_distribution<double> radius(cfg.blob_radius_min, cfg.blob_radius_max);
    const int blobs = count(rng);
    for (int b = 0; b < blobs; ++b) {
      const int ci = cell(rng);
      const int cj = cell(rng);
      const double r = radius(rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= r * r) tumour[static_cast<std::size_t>(i) * n + j] = 1;
    }
  }

  // Slides differ in how noisy their patch classifier is: the per-slide
  // false-positive rate is uniform on an interval whose mean is noise_rate,
  // so some slides come out entirely clean.
  const double mean_noise = cfg.noise_rate;
  const double slide_noise = mean_noise <= 0.5 ? 2.0 * mean_noise * unit(rng)
                                                : (2.0 * mean_noise - 1.0) + (2.0 - 2.0 * mean_noise) * unit(rng);

  slide.patches.reserve(tumour.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double p;
      if (tumour[static_cast<std::size_t>(i) * n + j]) {
        do p = sample_beta(rng, cfg.tumor_confidence);
        while (p < kMalignantThreshold);
      } else if (unit(rng) < slide_noise) {
        p = 0.5 + 0.5 * sample_beta(rng, cfg.false_positive_confidence);
      } else {
        p = 0.5 * unit(rng);
      }
      slide.patches.push_back({static_cast<std::int64_t>(kPatchSize) * j + kPatchSize / 2,
                               static_cast<std::int64_t>(kPatchSize) * i + kPatchSize / 2, p});
    }
  }
  return slide;
}

std::vector<SlideRecord> generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<SlideRecord> slides;
  slides.reserve(2 * static_cast<std::size_t>(cfg.slides_per_label));
  for (Label label : {Label::Malignant, Label::Normal})
    for (int i = 0; i < cfg.slides_per_label; ++i) slides.push_back(generate_slide(cfg, label, i));
  return slides;
}

DatasetManifest write_dataset(const std::vector<SlideRecord>& slides, const std::filesystem::path& dir) {
  DatasetManifest relative;
  for (const auto& s : slides) {
    const std::filesystem::path rel = std::filesystem::path("slides") / (s.slide_id + ".csv");
    write_slide(s, dir / rel);
    relative.entries.push_back({s.slide_id, s.label, rel});
  }
  write_manifest(relative, dir / "manifest.csv");
  DatasetManifest resolved = relative;
  for (auto& e : resolved.entries) e.predictions_path = dir / e.predictions_path;
  return resolved;
}

}  // namespace slideagg
