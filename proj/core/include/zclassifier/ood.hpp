#pragma once

#include <string>
#include <vector>

#include "zclassifier/gaussian_head.hpp"

namespace zc {

/// In-distribution vs out-of-distribution score lists; higher = more OOD.
struct ScoreSet {
  std::vector<double> in_scores;
  std::vector<double> out_scores;
};

struct BinaryReport {
  double threshold = 0.0;
  double accuracy = 0.0;
  double ind_precision = 0.0;
  double ind_recall = 0.0;
  double ood_precision = 0.0;
  double ood_recall = 0.0;
};

struct DetectionMetrics {
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr_at_95tpr = 0.0;
  double threshold = 0.0;
  BinaryReport report;
};

/// Minimum KL divergence from the predicted logit Gaussian to any class
/// prototype. Zero exactly on a prototype, strictly positive elsewhere.
double ood_score(std::span<const double> mu, std::span<const double> log_var);
std::vector<double> ood_scores(const GaussianLogits& g);

/// P(random OOD score > random InD score), ties counted 1/2
/// (Mann-Whitney U / (n_in * n_out)).
double auroc(const ScoreSet& s);

/// Area under precision-recall with OOD as the positive class;
/// average-precision form over the descending-score sweep.
double aupr(const ScoreSet& s);

/// Threshold at the k-th largest OOD score, k = ceil(tpr_target * n_out)
/// (the largest threshold with TPR >= target); returns the fraction of InD
/// scores at or above it.
double fpr_at_tpr(const ScoreSet& s, double tpr_target = 0.95);

/// Threshold maximizing balanced accuracy (TPR + TNR) / 2 over midpoint
/// candidates; ties resolve to the lowest threshold.
double pick_threshold(const ScoreSet& validation);

/// Confusion-derived rates at a fixed threshold; score >= threshold is
/// flagged OOD.
BinaryReport binary_report(const ScoreSet& test, double threshold);

/// Threshold picked on the validation split, all metrics on the test split.
DetectionMetrics evaluate_detection(const ScoreSet& validation, const ScoreSet& test,
                                    double tpr_target = 0.95);

/// Two-column dump (score,domain) for histogram plotting.
void write_scores_csv(const ScoreSet& s, const std::string& path);

}  // namespace zc
