#include "iclip/metrics.hpp"

#include <json.hpp>

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace iclip {

MetricsReport metrics_from_counts(long tp, long fp, long tn, long fn) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.tn = tn;
  r.fn = fn;
  const long total = tp + fp + tn + fn;
  if (total == 0) throw std::invalid_argument("metrics: empty input");
  r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
  r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

MetricsReport compute_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("metrics: prediction/label length mismatch");
  if (predictions.empty()) throw std::invalid_argument("metrics: empty input");
  long tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw std::invalid_argument("metrics: labels must be binary");
    if (predictions[i] == 1)
      (labels[i] == 1 ? tp : fp)++;
    else
      (labels[i] == 0 ? tn : fn)++;
  }
  return metrics_from_counts(tp, fp, tn, fn);
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.accuracy;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["tn"] = r.tn;
  j["fn"] = r.fn;
  j["mode"] = r.mode_tag;
  return j.dump(2);
}

std::string metrics_table(const std::vector<MetricsReport>& reports) {
  std::ostringstream oss;
  oss << std::left << std::setw(20) << "mode" << std::right << std::setw(10)
      << "acc" << std::setw(10) << "prec" << std::setw(10) << "recall"
      << std::setw(10) << "f1" << '\n';
  oss << std::fixed << std::setprecision(4);
  for (const auto& r : reports)
    oss << std::left << std::setw(20) << r.mode_tag << std::right
        << std::setw(10) << r.accuracy << std::setw(10) << r.precision
        << std::setw(10) << r.recall << std::setw(10) << r.f1 << '\n';
  return oss.str();
}

}  // namespace iclip
