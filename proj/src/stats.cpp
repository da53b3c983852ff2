#include "dfaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dfaudit {

DistributionSummary attribute_distribution(const AnnotationTable& table) {
    if (table.row_count() == 0) throw EmptyTable();
    const std::size_t width = table.attribute_count();
    std::vector<std::uint64_t> pos(width, 0), neg(width, 0);
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        const auto row = table.row(r);
        for (std::size_t a = 0; a < width; ++a) {
            if (row[a] == 1) pos[a]++;
            else if (row[a] == -1) neg[a]++;
        }
    }
    DistributionSummary summary;
    summary.sample_count = table.row_count();
    const double total = static_cast<double>(table.row_count());
    summary.rows.reserve(width);
    for (std::size_t a = 0; a < width; ++a) {
        DistributionRow row;
        row.attribute = table.registry().at(a).name;
        row.positive_pct = 100.0 * static_cast<double>(pos[a]) / total;
        row.negative_pct = 100.0 * static_cast<double>(neg[a]) / total;
        row.undefined_pct = 100.0 - row.positive_pct - row.negative_pct;
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

CorrelationMatrix pearson_correlations(const AnnotationTable& table, CorrelationPolicy policy) {
    if (table.row_count() == 0) throw EmptyTable();
    const std::size_t width = table.attribute_count();
    const std::size_t rows = table.row_count();
    CorrelationMatrix matrix(width);

    // All sums are exact integers over labels in {-1,0,1}, so serial and
    // parallel evaluation orders cannot differ.
    for (std::size_t i = 0; i < width; ++i) {
        for (std::size_t j = i; j < width; ++j) {
            std::int64_t n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (std::size_t r = 0; r < rows; ++r) {
                const std::int64_t x = table.raw(r, i);
                const std::int64_t y = table.raw(r, j);
                if (policy == CorrelationPolicy::DefinedPairsOnly && (x == 0 || y == 0)) {
                    continue;
                }
                ++n;
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                sxy += x * y;
            }
            const auto support = static_cast<std::uint64_t>(n);
            if (n < 2) {
                matrix.set(i, j, std::nullopt, support);
                continue;
            }
            const double var_x = static_cast<double>(n * sxx - sx * sx);
            const double var_y = static_cast<double>(n * syy - sy * sy);
            if (var_x <= 0.0 || var_y <= 0.0) {
                matrix.set(i, j, std::nullopt, support);
                continue;
            }
            const double cov = static_cast<double>(n * sxy - sx * sy);
            matrix.set(i, j, cov / std::sqrt(var_x * var_y), support);
        }
    }
    return matrix;
}

TopCorrelations top_correlations(const CorrelationMatrix& matrix, std::size_t k) {
    if (k == 0) throw InvalidConfig("k must be at least 1");
    std::vector<CorrelationEntry> entries;
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = i + 1; j < matrix.size(); ++j) {
            const auto value = matrix.at(i, j);
            if (!value) continue;
            entries.push_back({i, j, *value, matrix.support(i, j)});
        }
    }
    TopCorrelations top;
    auto pair_order = [](const CorrelationEntry& lhs, const CorrelationEntry& rhs) {
        return lhs.a != rhs.a ? lhs.a < rhs.a : lhs.b < rhs.b;
    };
    std::sort(entries.begin(), entries.end(),
              [&](const CorrelationEntry& lhs, const CorrelationEntry& rhs) {
                  if (lhs.r != rhs.r) return lhs.r > rhs.r;
                  return pair_order(lhs, rhs);
              });
    for (const auto& e : entries) {
        if (e.r <= 0.0 || top.positive.size() == k) break;
        top.positive.push_back(e);
    }
    std::sort(entries.begin(), entries.end(),
              [&](const CorrelationEntry& lhs, const CorrelationEntry& rhs) {
                  if (lhs.r != rhs.r) return lhs.r < rhs.r;
                  return pair_order(lhs, rhs);
              });
    for (const auto& e : entries) {
        if (e.r >= 0.0 || top.negative.size() == k) break;
        top.negative.push_back(e);
    }
    return top;
}

std::vector<std::size_t> SupportFilterResult::kept_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].kept) out.push_back(i);
    }
    return out;
}

namespace {

SupportFilterResult support_filter_impl(const AttributeRegistry& registry,
                                        std::span<const std::int8_t> cells,
                                        std::size_t rows, std::uint64_t min_count) {
    const std::size_t width = registry.size();
    std::vector<std::uint64_t> pos(width, 0), neg(width, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::int8_t* row = cells.data() + r * width;
        for (std::size_t a = 0; a < width; ++a) {
            if (row[a] == 1) pos[a]++;
            else if (row[a] == -1) neg[a]++;
        }
    }
    SupportFilterResult result;
    result.min_count = min_count;
    result.rows.reserve(width);
    for (std::size_t a = 0; a < width; ++a) {
        SupportRow row;
        row.attribute = registry.at(a).name;
        row.positive_count = pos[a];
        row.negative_count = neg[a];
        row.kept = pos[a] >= min_count && neg[a] >= min_count;
        result.rows.push_back(std::move(row));
    }
    return result;
}

} // namespace

SupportFilterResult support_filter(const AnnotationTable& table, std::uint64_t min_count) {
    return support_filter_impl(table.registry(), table.cells(), table.row_count(), min_count);
}

SupportFilterResult support_filter(const AuditDataset& dataset, std::uint64_t min_count) {
    return support_filter_impl(dataset.registry(), dataset.labels(), dataset.size(), min_count);
}

const std::vector<std::string>& default_exclusion_overrides() {
    static const std::vector<std::string> overrides = {"Brown Eyes", "Bags Under Eyes"};
    return overrides;
}

ExclusionResult cross_dataset_exclusion(const AttributeRegistry& registry,
                                        const std::unordered_map<std::string, int>& marks,
                                        int max_marks,
                                        const std::vector<std::string>& overrides) {
    for (const auto& [name, count] : marks) {
        if (!registry.index_of(name)) throw UnknownAttribute(name);
    }
    std::unordered_set<std::string> override_set;
    for (const auto& name : overrides) {
        if (!registry.index_of(name)) throw UnknownAttribute(name);
        override_set.insert(name);
    }

    ExclusionResult result;
    result.rows.reserve(registry.size());
    for (const auto& attr : registry.attributes()) {
        ExclusionRow row;
        row.attribute = attr.name;
        const auto it = marks.find(attr.name);
        row.marks = it == marks.end() ? 0 : it->second;
        if (override_set.count(attr.name) != 0) {
            row.excluded = true;
            row.reason = "override";
        } else if (row.marks > max_marks) {
            row.excluded = true;
            row.reason = "marks";
        }
        if (!row.excluded) result.kept.push_back(attr.name);
        result.rows.push_back(std::move(row));
    }
    return result;
}

} // namespace dfaudit
