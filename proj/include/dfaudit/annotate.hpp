#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfaudit/core.hpp"

namespace dfaudit {

// Output of an upstream attribute classifier for one (sample, attribute):
// a binary decision and the confidence attached to it.
struct ConfidenceRecord {
    std::string sample_id;
    std::string attribute;
    TernaryLabel decision = TernaryLabel::Positive; // Positive or Negative
    double confidence = 0.0;
};

struct FilterConfig {
    // Decisions strictly below the threshold become Undefined. "Below" is
    // strict: a confidence of exactly 0.90 keeps its decision.
    double threshold = 0.90;
};

// Maps classifier decisions to ternary labels: the decision sign when
// confidence >= threshold, Undefined otherwise. Pairs never streamed are
// Undefined. Rows appear in first-occurrence order of sample_id.
AnnotationTable apply_confidence_filter(std::span<const ConfidenceRecord> records,
                                        const FilterConfig& config,
                                        const AttributeRegistry& registry);

// confidences.csv: header `sample_id,attribute,decision,confidence`,
// decision in {1,-1}, confidence in [0,1].
std::vector<ConfidenceRecord> load_confidences(std::istream& source);
std::vector<ConfidenceRecord> load_confidences_file(const std::string& path);

struct CorrectnessRow {
    std::string attribute;
    double accuracy = 0.0;
    std::optional<double> precision; // empty when TP+FP == 0
    std::optional<double> recall;    // empty when TP+FN == 0
    std::uint64_t support = 0;       // jointly defined cells
};

struct CorrectnessReport {
    std::vector<CorrectnessRow> rows;
    double macro_accuracy = 0.0;
    std::optional<double> macro_precision;
    std::optional<double> macro_recall;

    // e.g. "0.92 0.90 0.94"
    std::string macro_summary() const;
};

// Compares generated labels against human ground truth on the cells where
// both are defined, with Positive as the positive class. Undefined human
// labels mean "not evaluated" and are skipped, not counted as disagreement.
CorrectnessReport correctness_study(const AnnotationTable& generated,
                                    const AnnotationTable& human);

} // namespace dfaudit
