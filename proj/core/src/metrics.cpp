#include "moodnet/metrics.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "moodnet/dataset.hpp"
#include "moodnet/errors.hpp"

namespace moodnet {

EvalReport report_from_confusion(
    const std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>& confusion) {
  EvalReport report;
  report.confusion = confusion;
  for (int t = 0; t < kNumClasses; ++t) {
    for (int p = 0; p < kNumClasses; ++p) {
      const std::int64_t n = confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
      if (n < 0) {
        throw InputError("confusion matrix has negative count at [" + std::to_string(t) + "][" +
                         std::to_string(p) + "]");
      }
      report.samples += n;
    }
  }

  double f1_sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    std::int64_t tp = confusion[ci][ci];
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    for (int o = 0; o < kNumClasses; ++o) {
      if (o == c) continue;
      const auto oi = static_cast<std::size_t>(o);
      fp += confusion[oi][ci];
      fn += confusion[ci][oi];
    }
    ClassMetrics& m = report.per_class[ci];
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                          : 0.0;
    f1_sum += m.f1;
  }
  report.macro_f1 = f1_sum / kNumClasses;
  return report;
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[128];
  out << "class  precision  recall     f1\n";
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
    std::snprintf(buf, sizeof(buf), "%-5s  %8.2f%%  %6.2f%%  %6.2f%%\n", index_to_label(c),
                  100.0 * m.precision, 100.0 * m.recall, 100.0 * m.f1);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "macro F1 %.2f%% over %lld samples\n", 100.0 * report.macro_f1,
                static_cast<long long>(report.samples));
  out << buf;
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  for (int t = 0; t < kNumClasses; ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < kNumClasses; ++p) {
      row.push_back(report.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)]);
    }
    j["confusion"].push_back(row);
  }
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
    j["per_class"][index_to_label(c)] = {
        {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  j["macro_f1"] = report.macro_f1;
  j["samples"] = report.samples;
  return j.dump(2) + "\n";
}

}  // namespace moodnet
