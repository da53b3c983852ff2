#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dfaudit/core.hpp"

namespace dfaudit {

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view split_name(Split split);

// Identity-level partition of a dataset. Every identity appears exactly once,
// so no two splits can share a subject.
struct SplitAssignment {
    std::map<std::string, Split> assignment;
    std::array<double, 3> ratios{0.6, 0.2, 0.2};

    std::array<std::size_t, 3> counts() const;
};

// CSV of ternary labels: header `sample_id,<attr>,...`; cells in {-1,0,1}.
// Columns may be permuted relative to the registry; the in-memory table is
// always in registry order. Unknown or missing columns raise HeaderMismatch.
AnnotationTable load_annotations(std::istream& source, const AttributeRegistry& registry);
AnnotationTable load_annotations_file(const std::string& path, const AttributeRegistry& registry);
void write_annotations_csv(const AnnotationTable& table, std::ostream& out);

// CSV of predictions: header `sample_id,truth[,predicted][,score]` with
// truth/predicted in {0,1} (0 = pristine, 1 = fake) and score in [0,1]. When
// only a score is present, predicted = fake iff score >= threshold. An
// explicit predicted column wins over the score; disagreements with the
// threshold rule are reported through `warnings` when provided.
PredictionSet load_predictions(std::istream& source, double score_threshold = 0.5,
                               std::vector<std::string>* warnings = nullptr);
PredictionSet load_predictions_file(const std::string& path, double score_threshold = 0.5,
                                    std::vector<std::string>* warnings = nullptr);
void write_predictions_csv(const PredictionSet& predictions, std::ostream& out);

// manifest.json: { "name": str, "identities": { "<sample_id>": "<identity_id>" } }
DatasetManifest load_manifest(std::istream& source);
DatasetManifest load_manifest_file(const std::string& path);
void write_manifest_json(const DatasetManifest& manifest, std::ostream& out);

// Shuffles identities with a seeded generator and cuts at the cumulative
// ratios, so all samples of one identity land in exactly one split. Realized
// sizes deviate from round(ratio * n_identities) by at most one.
SplitAssignment subject_exclusive_split(const DatasetManifest& manifest,
                                        const std::array<double, 3>& ratios,
                                        std::uint64_t seed);

// splits.csv: `identity_id,split` with split in {train,val,test}.
void write_splits_csv(const SplitAssignment& assignment, std::ostream& out);

// Registry file: one attribute per line as `name[,category[,excluded]]`.
AttributeRegistry load_registry(std::istream& source);
AttributeRegistry load_registry_file(const std::string& path);
void write_registry(const AttributeRegistry& registry, std::ostream& out);

} // namespace dfaudit
