#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "moodnet/model_config.hpp"

namespace moodnet {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  // confusion[true_class][predicted_class]
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  std::int64_t samples = 0;
};

/// Per-class precision/recall/F1 from a confusion matrix, with 0/0 counted as
/// zero, and macro F1 as the unweighted mean over all classes.
EvalReport report_from_confusion(
    const std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>& confusion);

/// Human-readable table with metrics as percentages (two decimals).
std::string format_report_table(const EvalReport& report);

/// JSON document with the confusion matrix and all metrics as fractions.
std::string report_to_json(const EvalReport& report);

}  // namespace moodnet
