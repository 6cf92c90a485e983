#ifndef ICLIP_METRICS_HPP
#define ICLIP_METRICS_HPP

#include <string>
#include <vector>

namespace iclip {

/// Binary classification metrics with sarcastic (label 1) as the positive
/// class. Precision/recall/F1 fall back to 0 on empty denominators.
struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  std::string mode_tag;  // "classifier-only" or "mep(L=...)"
};

MetricsReport compute_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels);

MetricsReport metrics_from_counts(long tp, long fp, long tn, long fn);

std::string metrics_to_json(const MetricsReport& report);
std::string metrics_table(const std::vector<MetricsReport>& reports);

}  // namespace iclip

#endif  // ICLIP_METRICS_HPP
