#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slideagg {

// Class index 0 is malignant, 1 is normal; this matches the order of the
// network's softmax pair (p_malignant, p_normal).
enum class Label : int { Malignant = 0, Normal = 1 };

inline constexpr int class_index(Label l) { return static_cast<int>(l); }

// A patch counts as malignant-classified from 0.5 upward; ties go to malignant.
inline constexpr double kMalignantThreshold = 0.5;

inline constexpr bool is_malignant(double prob_malignant) {
  return prob_malignant >= kMalignantThreshold;
}

std::string_view to_string(Label l);
// Case-insensitive; nullopt for anything other than "malignant" / "normal".
std::optional<Label> parse_label(std::string_view token);

struct PatchPrediction {
  std::int64_t x = 0;  // patch center, pixels
  std::int64_t y = 0;
  double prob_malignant = 0.0;

  friend bool operator==(const PatchPrediction&, const PatchPrediction&) = default;
};

struct SlideRecord {
  std::string slide_id;
  Label label = Label::Normal;
  std::vector<PatchPrediction> patches;

  friend bool operator==(const SlideRecord&, const SlideRecord&) = default;
};

}  // namespace slideagg
