#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "slideagg/features.hpp"

namespace slideagg {

// Slide-level classifier over FeatureVectors, pluggable into cross-validation.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string name() const = 0;
  virtual void fit(const Dataset& train, std::uint64_t seed) = 0;
  // Throws NotFitted before fit().
  virtual double predict_proba(const FeatureVector& fv) const = 0;

  Label predict(const FeatureVector& fv) const {
    return predict_proba(fv) >= kMalignantThreshold ? Label::Malignant : Label::Normal;
  }
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>()>;

// Throws SingleClassDataset unless both labels occur.
void require_both_labels(const Dataset& data);

}  // namespace slideagg
