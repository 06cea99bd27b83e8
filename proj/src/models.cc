// certainty/src/models.cc

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

#include "certainty/models.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <spdlog/spdlog.h>

#include "certainty/error.h"

namespace certainty {

namespace {

int CheckRectangular(const FeatureMatrix &x) {
  if (x.empty()) throw Error(ErrorKind::kEmptyData, "no training rows");
  const std::size_t p = x.front().size();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].size() != p)
      throw Error(ErrorKind::kDimensionMismatch, "row " + std::to_string(i) + " has " +
                                                     std::to_string(x[i].size()) +
                                                     " columns, expected " + std::to_string(p));
  return static_cast<int>(p);
}

Error Schema(const std::string &msg) {
  return Error(ErrorKind::kSchemaViolation, "model: " + msg);
}

void CheckHeader(const nlohmann::json &doc, const char *type) {
  if (!doc.is_object() || doc.value("schema_version", 0) != kModelSchemaVersion)
    throw Schema("unsupported schema_version");
  if (doc.value("type", std::string()) != type)
    throw Schema(std::string("expected type '") + type + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

nlohmann::ordered_json LinearModel::ToJson() const {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["type"] = "linear";
  doc["intercept"] = intercept;
  doc["coefficients"] = coefficients;
  doc["training_rms"] = training_rms;
  doc["rank_deficient"] = rank_deficient;
  return doc;
}

LinearModel LinearModel::FromJson(const nlohmann::json &doc) {
  CheckHeader(doc, "linear");
  LinearModel m;
  try {
    m.intercept = doc.at("intercept").get<double>();
    m.coefficients = doc.at("coefficients").get<std::vector<double>>();
    m.training_rms = doc.value("training_rms", 0.0);
    m.rank_deficient = doc.value("rank_deficient", false);
  } catch (const nlohmann::json::exception &e) {
    throw Schema(e.what());
  }
  return m;
}

LinearModel FitOls(const FeatureMatrix &x, std::span<const double> y) {
  const int p = CheckRectangular(x);
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(y.size()) != n)
    throw Error(ErrorKind::kDimensionMismatch, "rows and targets differ in length");
  if (n < p + 1)
    throw Error(ErrorKind::kEmptyData, "need at least " + std::to_string(p + 1) +
                                           " rows for " + std::to_string(p) + " inputs");

  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = x[i][j];
    b(i) = y[i];
  }
  const Eigen::RowVectorXd x_mean = a.colwise().mean();
  const double y_mean = b.mean();
  a.rowwise() -= x_mean;
  b.array() -= y_mean;

  LinearModel model;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (p > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    beta = cod.solve(b);
    if (cod.rank() < p) {
      model.rank_deficient = true;
      spdlog::debug("least squares: rank {} < {} inputs; using the minimum-norm solution",
                   cod.rank(), p);
    }
  }
  model.coefficients.assign(beta.data(), beta.data() + p);
  model.intercept = y_mean - x_mean.dot(beta);
  const Eigen::VectorXd resid = b - a * beta;
  model.training_rms = std::sqrt(resid.squaredNorm() / n);
  return model;
}

double PredictScore(const LinearModel &model, std::span<const double> x) {
  if (x.size() != model.coefficients.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "model expects " + std::to_string(model.coefficients.size()) +
                    " inputs, got " + std::to_string(x.size()));
  double s = model.intercept;
  for (std::size_t j = 0; j < x.size(); ++j) s += model.coefficients[j] * x[j];
  return s;
}

LinearModel ConstantModel(double value, int dimension) {
  LinearModel m;
  m.intercept = value;
  m.coefficients.assign(dimension, 0.0);
  return m;
}

// ---------------------------------------------------------------------------

std::string_view Class3Name(CertaintyClass3 c) {
  switch (c) {
    case CertaintyClass3::kUncertain: return "uncertain";
    case CertaintyClass3::kNeutral: return "neutral";
    case CertaintyClass3::kCertain: return "certain";
  }
  return "";
}

std::string_view Class2Name(CertaintyClass2 c) {
  return c == CertaintyClass2::kCertain ? "certain" : "uncertain";
}

CertaintyClass3 ScoreToClass3(double score) {
  if (!std::isfinite(score))
    throw Error(ErrorKind::kInvalidParameters, "non-finite certainty score");
  const double r = std::clamp(std::floor(score + 0.5), 1.0, 5.0);
  if (r <= 2) return CertaintyClass3::kUncertain;
  if (r == 3) return CertaintyClass3::kNeutral;
  return CertaintyClass3::kCertain;
}

CertaintyClass2 ScoreToClass2(double score) {
  if (!std::isfinite(score))
    throw Error(ErrorKind::kInvalidParameters, "non-finite certainty score");
  return score < 3.0 ? CertaintyClass2::kUncertain : CertaintyClass2::kCertain;
}

double RmsError(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw Error(ErrorKind::kLengthMismatch, "rms error: " + std::to_string(predictions.size()) +
                                                " predictions vs " +
                                                std::to_string(truths.size()) + " truths");
  if (predictions.empty()) throw Error(ErrorKind::kEmptyData, "rms error of nothing");
  double s = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double d = predictions[i] - truths[i];
    s += d * d;
  }
  return std::sqrt(s / truths.size());
}

// ---------------------------------------------------------------------------
// Tree

namespace {

constexpr double kGainEps = 1e-10;

double Entropy(const std::vector<double> &counts, double total) {
  if (total <= 0) return 0.0;
  double h = 0;
  for (double c : counts)
    if (c > 0) h -= c / total * std::log2(c / total);
  return h;
}

int Majority(const std::vector<double> &counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  double ratio = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix &x, std::span<const int> y, int k, const TreeParams &params,
              std::vector<TreeNode> *nodes)
      : x_(x), y_(y), k_(k), params_(params), nodes_(nodes) {}

  int Build(std::vector<int> idx) {
    const int id = static_cast<int>(nodes_->size());
    nodes_->emplace_back();
    TreeNode node;
    node.distribution = Counts(idx);
    node.label = Majority(node.distribution);
    const bool pure = node.distribution[node.label] == static_cast<double>(idx.size());
    SplitCandidate best;
    if (!pure && static_cast<int>(idx.size()) >= 2 * params_.min_leaf) best = BestSplit(idx);
    if (best.feature >= 0) {
      std::vector<int> lo, hi;
      for (int i : idx) (x_[i][best.feature] <= best.threshold ? lo : hi).push_back(i);
      node.feature = best.feature;
      node.threshold = best.threshold;
      (*nodes_)[id] = node;
      const int l = Build(std::move(lo));
      const int r = Build(std::move(hi));
      (*nodes_)[id].left = l;
      (*nodes_)[id].right = r;
    } else {
      (*nodes_)[id] = node;
    }
    return id;
  }

 private:
  std::vector<double> Counts(const std::vector<int> &idx) const {
    std::vector<double> c(k_, 0.0);
    for (int i : idx) c[y_[i]] += 1;
    return c;
  }

  SplitCandidate BestSplit(const std::vector<int> &idx) const {
    const int p = static_cast<int>(x_.front().size());
    const double n = static_cast<double>(idx.size());
    const std::vector<double> parent = Counts(idx);
    const double h_parent = Entropy(parent, n);
    std::vector<SplitCandidate> per_feature;
    for (int f = 0; f < p; ++f) {
      std::vector<int> order = idx;
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return x_[a][f] < x_[b][f]; });
      std::vector<double> left(k_, 0.0), right = parent;
      SplitCandidate cand;
      cand.feature = -1;
      for (std::size_t m = 0; m + 1 < order.size(); ++m) {
        left[y_[order[m]]] += 1;
        right[y_[order[m]]] -= 1;
        const double v = x_[order[m]][f], next = x_[order[m + 1]][f];
        if (!(next > v)) continue;
        const double nl = static_cast<double>(m + 1), nr = n - nl;
        if (nl < params_.min_leaf || nr < params_.min_leaf) continue;
        const double gain =
            h_parent - (nl / n) * Entropy(left, nl) - (nr / n) * Entropy(right, nr);
        if (cand.feature < 0 || gain > cand.gain + kGainEps) {
          const double split_info = -(nl / n) * std::log2(nl / n) - (nr / n) * std::log2(nr / n);
          cand = {f, v + (next - v) / 2, gain, split_info > 0 ? gain / split_info : 0.0};
        }
      }
      if (cand.feature >= 0 && cand.gain > kGainEps) per_feature.push_back(cand);
    }
    SplitCandidate best;
    if (per_feature.empty()) return best;
    double avg = 0;
    for (const auto &c : per_feature) avg += c.gain;
    avg /= static_cast<double>(per_feature.size());
    for (const auto &c : per_feature) {
      if (c.gain < avg - kGainEps) continue;
      if (best.feature < 0 || c.ratio > best.ratio + kGainEps) best = c;
    }
    return best;
  }

  const FeatureMatrix &x_;
  std::span<const int> y_;
  int k_;
  TreeParams params_;
  std::vector<TreeNode> *nodes_;
};

double LeafErrors(const TreeNode &node, double confidence) {
  const double n = std::accumulate(node.distribution.begin(), node.distribution.end(), 0.0);
  const double e = n - node.distribution[node.label];
  return e + PessimisticExtraErrors(n, e, confidence);
}

// Returns the estimated errors of the (possibly pruned) subtree at `id`.
double Prune(std::vector<TreeNode> *nodes, int id, double confidence) {
  TreeNode &node = (*nodes)[id];
  if (node.leaf()) return LeafErrors(node, confidence);
  const double subtree = Prune(nodes, node.left, confidence) + Prune(nodes, node.right, confidence);
  TreeNode &again = (*nodes)[id];
  const double as_leaf = LeafErrors(again, confidence);
  if (as_leaf <= subtree + 0.1) {
    again.feature = -1;
    again.left = again.right = -1;
    return as_leaf;
  }
  return subtree;
}

// Drops nodes unreachable after pruning, keeping preorder numbering.
std::vector<TreeNode> Compact(const std::vector<TreeNode> &nodes) {
  std::vector<TreeNode> out;
  auto visit = [&](auto &&self, int id) -> int {
    const int nid = static_cast<int>(out.size());
    out.push_back(nodes[id]);
    if (!nodes[id].leaf()) {
      const int l = self(self, nodes[id].left);
      const int r = self(self, nodes[id].right);
      out[nid].left = l;
      out[nid].right = r;
    }
    return nid;
  };
  visit(visit, 0);
  return out;
}

nlohmann::ordered_json NodeJson(const std::vector<TreeNode> &nodes, int id) {
  const TreeNode &n = nodes[id];
  nlohmann::ordered_json j;
  if (n.leaf()) {
    j["label"] = n.label;
  } else {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
  }
  j["distribution"] = n.distribution;
  if (!n.leaf()) {
    j["le"] = NodeJson(nodes, n.left);
    j["gt"] = NodeJson(nodes, n.right);
  }
  return j;
}

int NodeFromJson(const nlohmann::json &j, int k, int p, std::vector<TreeNode> *nodes) {
  const int id = static_cast<int>(nodes->size());
  nodes->emplace_back();
  TreeNode node;
  node.distribution = j.at("distribution").get<std::vector<double>>();
  if (static_cast<int>(node.distribution.size()) != k) throw Schema("distribution size");
  node.label = Majority(node.distribution);
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<int>();
    if (node.feature < 0 || node.feature >= p) throw Schema("feature index out of range");
    node.threshold = j.at("threshold").get<double>();
    (*nodes)[id] = node;
    const int l = NodeFromJson(j.at("le"), k, p, nodes);
    const int r = NodeFromJson(j.at("gt"), k, p, nodes);
    (*nodes)[id].left = l;
    (*nodes)[id].right = r;
  } else {
    node.label = j.at("label").get<int>();
    (*nodes)[id] = node;
  }
  return id;
}

}  // namespace

double PessimisticExtraErrors(double n, double e, double confidence) {
  if (n <= 0) return 0.0;
  if (e < 1) {
    const double base = n * (1 - std::pow(confidence, 1 / n));
    if (e == 0) return base;
    return base + e * (PessimisticExtraErrors(n, 1, confidence) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = boost::math::quantile(boost::math::normal(), 1 - confidence);
  const double f = (e + 0.5) / n;
  const double r =
      (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) /
      (1 + z * z / n);
  return r * n - e;
}

DecisionTree FitTree(const FeatureMatrix &x, std::span<const int> y, int num_classes,
                     const TreeParams &params) {
  const int p = CheckRectangular(x);
  if (y.size() != x.size())
    throw Error(ErrorKind::kDimensionMismatch, "rows and labels differ in length");
  if (num_classes < 1) throw Error(ErrorKind::kInvalidParameters, "num_classes < 1");
  if (params.min_leaf < 1 || !(params.confidence > 0 && params.confidence <= 0.5))
    throw Error(ErrorKind::kInvalidParameters, "min_leaf >= 1 and confidence in (0, 0.5]");
  for (int label : y)
    if (label < 0 || label >= num_classes)
      throw Error(ErrorKind::kInvalidParameters, "label out of range");

  DecisionTree tree;
  tree.num_classes_ = num_classes;
  tree.num_features_ = p;
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  TreeBuilder(x, y, num_classes, params, &tree.nodes_).Build(std::move(idx));
  if (params.prune) {
    Prune(&tree.nodes_, 0, params.confidence);
    tree.nodes_ = Compact(tree.nodes_);
  }
  return tree;
}

int DecisionTree::Predict(std::span<const double> x) const {
  if (nodes_.empty()) throw Error(ErrorKind::kEmptyData, "untrained tree");
  if (static_cast<int>(x.size()) != num_features_)
    throw Error(ErrorKind::kDimensionMismatch, "tree expects " + std::to_string(num_features_) +
                                                   " inputs, got " + std::to_string(x.size()));
  int id = 0;
  while (!nodes_[id].leaf())
    id = x[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
  return nodes_[id].label;
}

int DecisionTree::depth() const {
  auto d = [&](auto &&self, int id) -> int {
    if (nodes_[id].leaf()) return 0;
    return 1 + std::max(self(self, nodes_[id].left), self(self, nodes_[id].right));
  };
  return nodes_.empty() ? 0 : d(d, 0);
}

int DecisionTree::leaves() const {
  return static_cast<int>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode &n) { return n.leaf(); }));
}

nlohmann::ordered_json DecisionTree::ToJson() const {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kModelSchemaVersion;
  doc["type"] = "tree";
  doc["num_classes"] = num_classes_;
  doc["num_features"] = num_features_;
  doc["root"] = NodeJson(nodes_, 0);
  return doc;
}

DecisionTree DecisionTree::FromJson(const nlohmann::json &doc) {
  CheckHeader(doc, "tree");
  DecisionTree tree;
  try {
    tree.num_classes_ = doc.at("num_classes").get<int>();
    tree.num_features_ = doc.at("num_features").get<int>();
    NodeFromJson(doc.at("root"), tree.num_classes_, tree.num_features_, &tree.nodes_);
  } catch (const nlohmann::json::exception &e) {
    throw Schema(e.what());
  }
  return tree;
}

// ---------------------------------------------------------------------------
// Agreement

double CohensKappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kLengthMismatch, "kappa: rating vectors differ in length");
  if (a.empty()) throw Error(ErrorKind::kEmptyData, "kappa of no items");
  std::map<int, double> ma, mb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1;
    mb[b[i]] += 1;
    if (a[i] == b[i]) agree += 1;
  }
  const double n = static_cast<double>(a.size());
  double pe = 0;
  for (const auto &[cat, count] : ma) {
    auto it = mb.find(cat);
    if (it != mb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0 - 1e-12)
    throw Error(ErrorKind::kDegenerateMarginals, "kappa undefined: chance agreement is 1");
  return (agree / n - pe) / (1 - pe);
}

double AveragePairwiseKappa(const std::vector<std::vector<int>> &judges) {
  if (judges.size() < 2) throw Error(ErrorKind::kEmptyData, "kappa needs two or more judges");
  double sum = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < judges.size(); ++i)
    for (std::size_t j = i + 1; j < judges.size(); ++j) {
      sum += CohensKappa(judges[i], judges[j]);
      ++pairs;
    }
  return sum / pairs;
}

double FleissKappa(const std::vector<std::vector<int>> &judges) {
  if (judges.size() < 2) throw Error(ErrorKind::kEmptyData, "kappa needs two or more judges");
  const std::size_t items = judges.front().size();
  for (const auto &j : judges)
    if (j.size() != items)
      throw Error(ErrorKind::kLengthMismatch, "kappa: judges rated different item counts");
  if (items == 0) throw Error(ErrorKind::kEmptyData, "kappa of no items");
  const double r = static_cast<double>(judges.size());
  std::map<int, double> totals;
  double p_bar = 0;
  for (std::size_t i = 0; i < items; ++i) {
    std::map<int, double> counts;
    for (const auto &j : judges) counts[j[i]] += 1;
    double sq = 0;
    for (const auto &[cat, c] : counts) {
      sq += c * c;
      totals[cat] += c;
    }
    p_bar += (sq - r) / (r * (r - 1));
  }
  p_bar /= static_cast<double>(items);
  double pe = 0;
  for (const auto &[cat, c] : totals) {
    const double pj = c / (static_cast<double>(items) * r);
    pe += pj * pj;
  }
  if (pe >= 1.0 - 1e-12)
    throw Error(ErrorKind::kDegenerateMarginals, "kappa undefined: chance agreement is 1");
  return (p_bar - pe) / (1 - pe);
}

double AgreementKappa(const std::vector<std::vector<int>> &judges, KappaVariant variant) {
  return variant == KappaVariant::kFleiss ? FleissKappa(judges) : AveragePairwiseKappa(judges);
}

KappaVariant ParseKappaVariant(std::string_view name) {
  if (name == "pairwise" || name == "cohen") return KappaVariant::kPairwiseCohen;
  if (name == "fleiss") return KappaVariant::kFleiss;
  throw Error(ErrorKind::kInvalidParameters,
              "unknown kappa variant '" + std::string(name) + "' (pairwise, fleiss)");
}

std::string Partition3::ToString() const {
  std::string out;
  for (int r = 1; r <= 5; ++r) {
    if (r > 1) out += Bin(r) == Bin(r - 1) ? "," : "|";
    out += std::to_string(r);
  }
  return out;
}

PartitionSearch BestPartitionForAgreement(const std::vector<std::vector<int>> &judges,
                                          KappaVariant variant) {
  if (judges.size() < 2) throw Error(ErrorKind::kEmptyData, "need two or more judges");
  PartitionSearch out;
  out.best = kDefaultPartition;
  std::optional<double> best_kappa;
  for (int low = 1; low <= 3; ++low)
    for (int high = low + 1; high <= 4; ++high) {
      PartitionScore s;
      s.partition = {low, high};
      std::vector<std::vector<int>> binned = judges;
      for (auto &j : binned)
        for (auto &r : j) r = s.partition.Bin(r);
      try {
        s.kappa = AgreementKappa(binned, variant);
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::kDegenerateMarginals) throw;
        s.defined = false;
      }
      out.scores.push_back(s);
    }
  // Default first so that it wins ties.
  for (const auto &s : out.scores)
    if (s.partition == kDefaultPartition && s.defined) best_kappa = s.kappa;
  for (const auto &s : out.scores) {
    if (!s.defined) continue;
    if (!best_kappa || s.kappa > *best_kappa + 1e-12) {
      best_kappa = s.kappa;
      out.best = s.partition;
    }
  }
  return out;
}

}  // namespace certainty
