#include "slideagg/types.hpp"

#include <algorithm>
#include <cctype>

namespace slideagg {

std::string_view to_string(Label l) { return l == Label::Malignant ? "malignant" : "normal"; }

std::optional<Label> parse_label(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "malignant") return Label::Malignant;
  if (lower == "normal") return Label::Normal;
  return std::nullopt;
}

}  // namespace slideagg
