#include "pfe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "pfe/errors.hpp"

namespace pfe {

namespace {

// Remaps arbitrary integer labels to 0..k-1 in order of first appearance.
std::vector<int> compact_labels(const Segmentation& seg, int& k_out) {
  std::unordered_map<int, int> remap;
  std::vector<int> out(seg.labels.size());
  for (std::size_t i = 0; i < seg.labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(seg.labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  k_out = static_cast<int>(remap.size());
  return out;
}

struct Contingency {
  int ka = 0, kb = 0;
  long long n = 0;
  std::map<std::pair<int, int>, long long> joint;
  std::vector<long long> row;  // sizes of a's segments
  std::vector<long long> col;  // sizes of b's segments
};

Contingency contingency(const Segmentation& a, const Segmentation& b) {
  if (a.labels.size() != b.labels.size()) {
    throw ConfigError("metrics: segmentations have different sizes");
  }
  if (a.labels.empty()) throw ConfigError("metrics: empty segmentation");
  Contingency t;
  std::vector<int> la = compact_labels(a, t.ka);
  std::vector<int> lb = compact_labels(b, t.kb);
  t.n = static_cast<long long>(la.size());
  t.row.assign(t.ka, 0);
  t.col.assign(t.kb, 0);
  for (std::size_t i = 0; i < la.size(); ++i) {
    t.joint[{la[i], lb[i]}]++;
    t.row[la[i]]++;
    t.col[lb[i]]++;
  }
  return t;
}

double pairs(long long m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }

}  // namespace

double covering(const Segmentation& pred, const Segmentation& gt) {
  Contingency t = contingency(gt, pred);  // rows = ground-truth segments
  double acc = 0.0;
  for (int g = 0; g < t.ka; ++g) {
    double best_iou = 0.0;
    for (int p = 0; p < t.kb; ++p) {
      auto it = t.joint.find({g, p});
      if (it == t.joint.end()) continue;
      double inter = static_cast<double>(it->second);
      double uni = static_cast<double>(t.row[g] + t.col[p]) - inter;
      best_iou = std::max(best_iou, inter / uni);
    }
    acc += static_cast<double>(t.row[g]) * best_iou;
  }
  return acc / static_cast<double>(t.n);
}

namespace {

double rand_index(const Segmentation& pred, const Segmentation& gt) {
  Contingency t = contingency(pred, gt);
  double total = pairs(t.n);
  if (total == 0.0) return 1.0;
  double same_pred = 0.0, same_gt = 0.0, same_both = 0.0;
  for (long long m : t.row) same_pred += pairs(m);
  for (long long m : t.col) same_gt += pairs(m);
  for (const auto& [key, m] : t.joint) same_both += pairs(m);
  double disagreements = same_pred + same_gt - 2.0 * same_both;
  return 1.0 - disagreements / total;
}

}  // namespace

double pri(const Segmentation& pred, const std::vector<Segmentation>& gts) {
  if (gts.empty()) throw ConfigError("pri: no ground truths");
  double acc = 0.0;
  for (const Segmentation& gt : gts) acc += rand_index(pred, gt);
  return acc / static_cast<double>(gts.size());
}

double voi(const Segmentation& pred, const Segmentation& gt) {
  Contingency t = contingency(pred, gt);
  const double n = static_cast<double>(t.n);
  double h_joint = 0.0, h_pred = 0.0, h_gt = 0.0;
  for (const auto& [key, m] : t.joint) {
    double p = static_cast<double>(m) / n;
    h_joint -= p * std::log(p);
  }
  for (long long m : t.row) {
    double p = static_cast<double>(m) / n;
    h_pred -= p * std::log(p);
  }
  for (long long m : t.col) {
    double p = static_cast<double>(m) / n;
    h_gt -= p * std::log(p);
  }
  // H(a|b) + H(b|a) = 2 H(a,b) - H(a) - H(b)
  double vi = 2.0 * h_joint - h_pred - h_gt;
  return std::max(vi, 0.0);
}

MetricsReport evaluate(const Segmentation& pred, const std::vector<Segmentation>& gts) {
  if (gts.empty()) throw ConfigError("evaluate: no ground truths");
  MetricsReport report;
  for (const Segmentation& gt : gts) {
    report.covering += covering(pred, gt);
    report.vi += voi(pred, gt);
  }
  report.covering /= static_cast<double>(gts.size());
  report.vi /= static_cast<double>(gts.size());
  report.pri = pri(pred, gts);
  return report;
}

}  // namespace pfe
