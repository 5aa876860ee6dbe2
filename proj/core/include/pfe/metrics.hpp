#pragma once

#include <vector>

#include "pfe/cluster.hpp"

namespace pfe {

struct MetricsReport {
  double covering = 0.0;  // in (0, 1]
  double pri = 0.0;       // in [0, 1]
  double vi = 0.0;        // nats, >= 0
};

/// Size-weighted best-IoU overlap of ground-truth segments by predicted
/// segments: (1/n) sum_{R in gt} |R| max_{R' in pred} IoU(R, R').
double covering(const Segmentation& pred, const Segmentation& gt);

/// Mean over ground truths of the Rand index (pairwise same/different
/// agreement), computed from the contingency table.
double pri(const Segmentation& pred, const std::vector<Segmentation>& gts);

/// Variation of information H(pred|gt) + H(gt|pred), natural log.
double voi(const Segmentation& pred, const Segmentation& gt);

/// covering and vi averaged over ground truths, pri as defined above.
MetricsReport evaluate(const Segmentation& pred, const std::vector<Segmentation>& gts);

}  // namespace pfe
