// certainty/models.h

// Copyright 2026  The Certainty Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CERTAINTY_MODELS_H_
#define CERTAINTY_MODELS_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace certainty {

using FeatureMatrix = std::vector<std::vector<double>>;  // row per example

constexpr int kModelSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Linear regression

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> coefficients;
  double training_rms = 0.0;
  bool rank_deficient = false;

  nlohmann::ordered_json ToJson() const;
  static LinearModel FromJson(const nlohmann::json &doc);
};

/// Least squares on centered data through a complete orthogonal
/// decomposition; collinear inputs get the minimum-norm solution and a
/// logged warning. Throws EmptyData unless rows >= columns + 1, and
/// DimensionMismatch for ragged input.
LinearModel FitOls(const FeatureMatrix &x, std::span<const double> y);

/// Throws DimensionMismatch.
double PredictScore(const LinearModel &model, std::span<const double> x);

/// A model that always predicts `value`.
LinearModel ConstantModel(double value, int dimension);

// ---------------------------------------------------------------------------
// Certainty classes

enum class CertaintyClass3 { kUncertain, kNeutral, kCertain };
enum class CertaintyClass2 { kUncertain, kCertain };

std::string_view Class3Name(CertaintyClass3 c);
std::string_view Class2Name(CertaintyClass2 c);

/// Round half up, clamp into 1..5, then 1-2 uncertain, 3 neutral, 4-5
/// certain. Throws InvalidParameters for a non-finite score.
CertaintyClass3 ScoreToClass3(double score);
CertaintyClass2 ScoreToClass2(double score);  // < 3 uncertain

double RmsError(std::span<const double> predictions, std::span<const double> truths);

// ---------------------------------------------------------------------------
// Decision tree

struct TreeParams {
  int min_leaf = 2;
  double confidence = 0.25;
  bool prune = true;
};

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;  // left branch takes x[feature] <= threshold
  int left = -1;
  int right = -1;
  int label = 0;  // majority class; ties go to the lowest label
  std::vector<double> distribution;  // training counts per class

  bool leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  DecisionTree() = default;

  int Predict(std::span<const double> x) const;
  int num_classes() const { return num_classes_; }
  int num_features() const { return num_features_; }
  const std::vector<TreeNode> &nodes() const { return nodes_; }
  int depth() const;
  int leaves() const;

  nlohmann::ordered_json ToJson() const;
  static DecisionTree FromJson(const nlohmann::json &doc);

 private:
  friend DecisionTree FitTree(const FeatureMatrix &, std::span<const int>, int,
                              const TreeParams &);
  std::vector<TreeNode> nodes_;  // nodes_[0] is the root
  int num_classes_ = 0;
  int num_features_ = 0;
};

/// Binary splits on midpoints between sorted feature values, chosen by gain
/// ratio among candidates whose information gain is positive and at least
/// the average; each side keeps min_leaf examples. Pruned bottom-up by
/// comparing pessimistic error estimates at the given confidence. Labels are
/// 0 .. num_classes - 1. Throws EmptyData or DimensionMismatch.
DecisionTree FitTree(const FeatureMatrix &x, std::span<const int> y, int num_classes,
                     const TreeParams &params = {});

/// Upper-confidence extra errors for a leaf covering n examples with e
/// errors.
double PessimisticExtraErrors(double n, double e, double confidence);

// ---------------------------------------------------------------------------
// Agreement

/// Unweighted Cohen's kappa. Throws LengthMismatch, EmptyData, and
/// DegenerateMarginals when chance agreement is 1.
double CohensKappa(std::span<const int> a, std::span<const int> b);

/// `judges[j][i]` is judge j's rating of item i.
double AveragePairwiseKappa(const std::vector<std::vector<int>> &judges);
double FleissKappa(const std::vector<std::vector<int>> &judges);

enum class KappaVariant { kPairwiseCohen, kFleiss };
double AgreementKappa(const std::vector<std::vector<int>> &judges, KappaVariant variant);
KappaVariant ParseKappaVariant(std::string_view name);

/// Three ordered bins over ratings 1..5: {1..low}, {low+1..high}, {high+1..5}.
struct Partition3 {
  int low = 2;
  int high = 3;

  int Bin(int rating) const { return rating <= low ? 0 : rating <= high ? 1 : 2; }
  std::string ToString() const;
  bool operator==(const Partition3 &) const = default;
};

constexpr Partition3 kDefaultPartition{2, 3};

struct PartitionScore {
  Partition3 partition;
  double kappa = 0.0;
  bool defined = true;  // false when kappa is undefined on the binned data
};

struct PartitionSearch {
  Partition3 best;
  std::vector<PartitionScore> scores;  // all six, in enumeration order
};

/// Exhaustive search over the six partitions; ties keep {1,2|3|4,5}, then
/// enumeration order. Throws EmptyData with fewer than two judges.
PartitionSearch BestPartitionForAgreement(const std::vector<std::vector<int>> &judges,
                                          KappaVariant variant = KappaVariant::kPairwiseCohen);

}  // namespace certainty

#endif  // CERTAINTY_MODELS_H_
