#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slideagg/classifier.hpp"
#include "slideagg/netcore.hpp"

namespace slideagg {

inline constexpr const char* kWideDeepTopology = "widedeep-v1";

// Input names of the three deep branches and the wide pass-through.
inline constexpr const char* kMphInput = "mph";
inline constexpr const char* kLsrlInput = "lsrl";
inline constexpr const char* kMccInput = "mcc";
inline constexpr const char* kMtrInput = "mtr";

// Layer widths; the defaults give the full model (two 300-unit layers per
// branch, concatenation width 3 * 300 + 1 = 901, two 300-unit head layers).
struct WideDeepShape {
  int branch_width = 300;
  int branch_depth = 2;
  int head_width = 300;
  int head_depth = 2;
};

nn::GraphSpec widedeep_spec(const WideDeepShape& shape = {});

struct WideDeepModel {
  nn::NetworkGraph<double> network;
  nn::TrainConfig config;
};

WideDeepModel build_widedeep(std::uint64_t seed, const WideDeepShape& shape = {});

// Routes mph -> branch 1, (slope, intercept) -> branch 2, mcc -> branch 3 and
// mtr straight into the concatenation. One column per feature vector.
nn::Inputs<double> widedeep_inputs(const std::vector<FeatureVector>& batch);
nn::Inputs<double> widedeep_inputs(const Dataset& data);

struct SlidePrediction {
  Label label;
  double p_malignant;
};

// Malignant iff p_malignant >= 0.5.
SlidePrediction predict_slide(const WideDeepModel& model, const FeatureVector& fv);

/// Initializes from config.seed and trains full-batch. Throws
/// SingleClassDataset unless both labels are present.
WideDeepModel train_widedeep(const Dataset& data, const nn::TrainConfig& config,
                             const WideDeepShape& shape = {},
                             std::vector<double>* loss_trace = nullptr);

// Throws MalformedModel if the file does not carry the widedeep-v1 topology.
WideDeepModel load_widedeep(const std::filesystem::path& path);
void save_widedeep(const WideDeepModel& model, const std::filesystem::path& path);

class WideDeepClassifier : public Classifier {
 public:
  explicit WideDeepClassifier(nn::TrainConfig config, WideDeepShape shape = {})
      : config_(config), shape_(shape) {}

  std::string name() const override { return "widedeep"; }
  // `seed` replaces config.seed for initialization.
  void fit(const Dataset& train, std::uint64_t seed) override;
  double predict_proba(const FeatureVector& fv) const override;

  const std::optional<WideDeepModel>& model() const { return model_; }

 private:
  nn::TrainConfig config_;
  WideDeepShape shape_;
  std::optional<WideDeepModel> model_;
};

}  // namespace slideagg
