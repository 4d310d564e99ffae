#include "zclassifier/ood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zclassifier/io.hpp"

namespace zc {

namespace {

void require_nonempty(const ScoreSet& s, const char* op) {
  if (s.in_scores.empty() || s.out_scores.empty()) {
    throw std::invalid_argument(std::string(op) + ": both score lists must be nonempty");
  }
  for (double v : s.in_scores)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite InD score");
  for (double v : s.out_scores)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite OOD score");
}

}  // namespace

double ood_score(std::span<const double> mu, std::span<const double> log_var) {
  const std::size_t k = mu.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    best = std::min(best, kl_to_prototype(mu, log_var, static_cast<int>(c)));
  }
  return best;
}

std::vector<double> ood_scores(const GaussianLogits& g) {
  const std::size_t n = g.batch(), k = g.num_classes();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ood_score({g.mu.data() + i * k, k}, {g.log_var.data() + i * k, k});
  }
  return out;
}

double auroc(const ScoreSet& s) {
  require_nonempty(s, "auroc");
  std::vector<double> in_sorted = s.in_scores;
  std::sort(in_sorted.begin(), in_sorted.end());
  double greater = 0.0, ties = 0.0;
  for (double o : s.out_scores) {
    const auto lo = std::lower_bound(in_sorted.begin(), in_sorted.end(), o);
    const auto hi = std::upper_bound(lo, in_sorted.end(), o);
    greater += static_cast<double>(lo - in_sorted.begin());
    ties += static_cast<double>(hi - lo);
  }
  const double pairs = static_cast<double>(s.in_scores.size()) * static_cast<double>(s.out_scores.size());
  return (greater + 0.5 * ties) / pairs;
}

double aupr(const ScoreSet& s) {
  require_nonempty(s, "aupr");
  std::vector<double> in_sorted = s.in_scores;
  std::vector<double> out_sorted = s.out_scores;
  std::sort(in_sorted.begin(), in_sorted.end(), std::greater<>());
  std::sort(out_sorted.begin(), out_sorted.end(), std::greater<>());

  const double n_out = static_cast<double>(out_sorted.size());
  std::size_t pi = 0, ni = 0;
  double tp = 0.0, fp = 0.0, prev_recall = 0.0, ap = 0.0;
  while (pi < out_sorted.size() || ni < in_sorted.size()) {
    // Next distinct threshold: admit every score tied at it together.
    double v;
    if (pi < out_sorted.size() && ni < in_sorted.size())
      v = std::max(out_sorted[pi], in_sorted[ni]);
    else if (pi < out_sorted.size())
      v = out_sorted[pi];
    else
      v = in_sorted[ni];
    while (pi < out_sorted.size() && out_sorted[pi] == v) {
      tp += 1.0;
      ++pi;
    }
    while (ni < in_sorted.size() && in_sorted[ni] == v) {
      fp += 1.0;
      ++ni;
    }
    const double recall = tp / n_out;
    const double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double fpr_at_tpr(const ScoreSet& s, double tpr_target) {
  require_nonempty(s, "fpr_at_tpr");
  if (!(tpr_target > 0.0) || tpr_target > 1.0) {
    throw std::invalid_argument("fpr_at_tpr: target must lie in (0, 1]");
  }
  std::vector<double> out_sorted = s.out_scores;
  std::sort(out_sorted.begin(), out_sorted.end(), std::greater<>());
  const std::size_t n_out = out_sorted.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(tpr_target * static_cast<double>(n_out)));
  if (k == 0) k = 1;
  if (k > n_out) k = n_out;
  const double threshold = out_sorted[k - 1];
  std::size_t above = 0;
  for (double v : s.in_scores)
    if (v >= threshold) ++above;
  return static_cast<double>(above) / static_cast<double>(s.in_scores.size());
}

double pick_threshold(const ScoreSet& validation) {
  require_nonempty(validation, "pick_threshold");
  std::vector<double> all = validation.in_scores;
  all.insert(all.end(), validation.out_scores.begin(), validation.out_scores.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> candidates;
  candidates.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    candidates.push_back(0.5 * (all[i] + all[i + 1]));
  candidates.push_back(all.back() + 1.0);

  std::vector<double> in_sorted = validation.in_scores;
  std::vector<double> out_sorted = validation.out_scores;
  std::sort(in_sorted.begin(), in_sorted.end());
  std::sort(out_sorted.begin(), out_sorted.end());
  const double n_in = static_cast<double>(in_sorted.size());
  const double n_out = static_cast<double>(out_sorted.size());

  double best_t = candidates.front();
  double best_ba = -1.0;
  for (double t : candidates) {
    const auto below_in = std::lower_bound(in_sorted.begin(), in_sorted.end(), t) - in_sorted.begin();
    const auto below_out =
        std::lower_bound(out_sorted.begin(), out_sorted.end(), t) - out_sorted.begin();
    const double tnr = static_cast<double>(below_in) / n_in;                    // in < t
    const double tpr = (n_out - static_cast<double>(below_out)) / n_out;        // out >= t
    const double ba = 0.5 * (tpr + tnr);
    if (ba > best_ba) {
      best_ba = ba;
      best_t = t;
    }
  }
  return best_t;
}

BinaryReport binary_report(const ScoreSet& test, double threshold) {
  require_nonempty(test, "binary_report");
  if (!std::isfinite(threshold)) throw std::invalid_argument("binary_report: non-finite threshold");
  double tp = 0.0, fn = 0.0, fp = 0.0, tn = 0.0;
  for (double v : test.out_scores) (v >= threshold ? tp : fn) += 1.0;
  for (double v : test.in_scores) (v >= threshold ? fp : tn) += 1.0;

  BinaryReport r;
  r.threshold = threshold;
  r.accuracy = (tp + tn) / (tp + tn + fp + fn);
  r.ood_recall = tp / (tp + fn);
  r.ind_recall = tn / (tn + fp);
  r.ood_precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
  r.ind_precision = (tn + fn) > 0.0 ? tn / (tn + fn) : 0.0;
  return r;
}

DetectionMetrics evaluate_detection(const ScoreSet& validation, const ScoreSet& test,
                                    double tpr_target) {
  DetectionMetrics m;
  m.threshold = pick_threshold(validation);
  m.auroc = auroc(test);
  m.aupr = aupr(test);
  m.fpr_at_95tpr = fpr_at_tpr(test, tpr_target);
  m.report = binary_report(test, m.threshold);
  return m;
}

void write_scores_csv(const ScoreSet& s, const std::string& path) {
  CsvWriter csv({"score", "domain"});
  for (double v : s.in_scores) csv.add_row({format_double(v), "ind"});
  for (double v : s.out_scores) csv.add_row({format_double(v), "ood"});
  csv.save(path);
}

}  // namespace zc
