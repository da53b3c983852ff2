#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dfaudit/core.hpp"

namespace dfaudit {

struct DistributionRow {
    std::string attribute;
    double positive_pct = 0.0;
    double negative_pct = 0.0;
    double undefined_pct = 0.0;
};

struct DistributionSummary {
    std::vector<DistributionRow> rows; // registry order
    std::uint64_t sample_count = 0;
};

// Per-attribute percentages of +1 / -1 / 0 over all rows; throws EmptyTable.
DistributionSummary attribute_distribution(const AnnotationTable& table);

enum class CorrelationPolicy {
    DefinedPairsOnly, // Pearson over samples where both labels are defined
    ZeroAsValue,      // treat Undefined as the numeric value 0
};

class CorrelationMatrix {
public:
    explicit CorrelationMatrix(std::size_t n)
        : n_(n), values_(n * n), support_(n * n, 0) {}

    std::size_t size() const { return n_; }
    std::optional<double> at(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::uint64_t support(std::size_t i, std::size_t j) const { return support_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, std::optional<double> value, std::uint64_t support) {
        values_[i * n_ + j] = value;
        values_[j * n_ + i] = value;
        support_[i * n_ + j] = support;
        support_[j * n_ + i] = support;
    }

private:
    std::size_t n_;
    std::vector<std::optional<double>> values_;
    std::vector<std::uint64_t> support_;
};

// Pairwise Pearson coefficients over the +-1 label encodings. Pairs with
// fewer than two usable samples or zero variance in either column carry no
// value (never a fabricated number).
CorrelationMatrix pearson_correlations(const AnnotationTable& table,
                                       CorrelationPolicy policy = CorrelationPolicy::DefinedPairsOnly);

struct CorrelationEntry {
    std::size_t a = 0;
    std::size_t b = 0; // a < b, registry indices
    double r = 0.0;
    std::uint64_t support = 0;
};

struct TopCorrelations {
    std::vector<CorrelationEntry> positive; // r > 0, descending
    std::vector<CorrelationEntry> negative; // r < 0, ascending
};

// Up to k most positive and k most negative defined off-diagonal pairs;
// ties broken by registry order of the pair.
TopCorrelations top_correlations(const CorrelationMatrix& matrix, std::size_t k);

struct SupportRow {
    std::string attribute;
    std::uint64_t positive_count = 0;
    std::uint64_t negative_count = 0;
    bool kept = false;
};

struct SupportFilterResult {
    std::vector<SupportRow> rows; // registry order
    std::uint64_t min_count = 100;

    std::vector<std::size_t> kept_indices() const;
};

// kept iff both classes reach min_count (inclusive).
SupportFilterResult support_filter(const AnnotationTable& table, std::uint64_t min_count = 100);
SupportFilterResult support_filter(const AuditDataset& dataset, std::uint64_t min_count = 100);

struct ExclusionRow {
    std::string attribute;
    int marks = 0;
    bool excluded = false;
    std::string reason; // "marks" / "override" / empty when kept
};

struct ExclusionResult {
    std::vector<ExclusionRow> rows; // registry order
    std::vector<std::string> kept;  // registry order
};

// The attributes flagged for low annotation accuracy, excluded regardless of
// per-dataset support.
const std::vector<std::string>& default_exclusion_overrides();

// excluded iff marks > max_marks or the attribute appears in `overrides`.
// Attributes absent from `marks` count zero marks; names unknown to the
// registry raise UnknownAttribute.
ExclusionResult cross_dataset_exclusion(const AttributeRegistry& registry,
                                        const std::unordered_map<std::string, int>& marks,
                                        int max_marks,
                                        const std::vector<std::string>& overrides =
                                            default_exclusion_overrides());

} // namespace dfaudit
