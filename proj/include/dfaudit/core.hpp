#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dfaudit/errors.hpp"

namespace dfaudit {

// Ternary annotation label. Serialized as -1 / 0 / 1 everywhere.
enum class TernaryLabel : std::int8_t {
    Negative = -1,
    Undefined = 0,
    Positive = 1,
};

inline bool is_valid_label(std::int8_t raw) {
    return raw == -1 || raw == 0 || raw == 1;
}

enum class AttributeCategory : std::uint8_t {
    Demographics,
    Skin,
    Hair,
    Beard,
    FaceGeometry,
    Mouth,
    Nose,
    Accessories,
    Other,
};

std::string_view category_name(AttributeCategory category);
std::optional<AttributeCategory> category_from_name(std::string_view name);

struct AttributeInfo {
    std::string name;
    AttributeCategory category = AttributeCategory::Other;
    bool excluded_low_accuracy = false;
};

// Ordered catalog of attributes. The order is the single source of column
// order for tables, reports and files.
class AttributeRegistry {
public:
    AttributeRegistry() = default;
    explicit AttributeRegistry(std::vector<AttributeInfo> attributes);

    // The 47 face attributes of the bundled annotation scheme, with the two
    // low-annotation-accuracy eye attributes pre-flagged.
    static const AttributeRegistry& default_registry();

    std::size_t size() const { return attributes_.size(); }
    const AttributeInfo& at(std::size_t index) const { return attributes_.at(index); }
    const std::vector<AttributeInfo>& attributes() const { return attributes_; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    bool operator==(const AttributeRegistry& other) const;

private:
    std::vector<AttributeInfo> attributes_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Dense sample × attribute matrix of ternary labels, one byte per cell so a
// laptop holds tens of millions of labels comfortably. Rows are stored in
// append order; ids are not required to be unique until validated.
class AnnotationTable {
public:
    explicit AnnotationTable(const AttributeRegistry& registry);

    const AttributeRegistry& registry() const { return *registry_; }
    std::size_t row_count() const { return ids_.size(); }
    std::size_t attribute_count() const { return width_; }

    // Rows of unexpected arity are padded/truncated for storage and recorded
    // so validation can report them.
    void append_row(std::string id, std::span<const std::int8_t> cells);

    const std::string& sample_id(std::size_t row) const { return ids_[row]; }
    const std::vector<std::string>& sample_ids() const { return ids_; }

    std::int8_t raw(std::size_t row, std::size_t attribute) const {
        return cells_[row * width_ + attribute];
    }
    TernaryLabel label(std::size_t row, std::size_t attribute) const {
        return static_cast<TernaryLabel>(raw(row, attribute));
    }
    std::span<const std::int8_t> row(std::size_t r) const {
        return {cells_.data() + r * width_, width_};
    }
    std::span<const std::int8_t> cells() const { return cells_; }

    std::optional<std::size_t> find_row(std::string_view id) const;

    struct IrregularRow {
        std::size_t row;
        std::size_t arity;
    };
    const std::vector<IrregularRow>& irregular_rows() const { return irregular_; }

    // FNV-1a over the raw label bytes in row-major registry order.
    std::uint64_t label_digest() const;

    bool operator==(const AnnotationTable& other) const;

private:
    const AttributeRegistry* registry_;
    std::size_t width_;
    std::vector<std::string> ids_;
    std::vector<std::int8_t> cells_;
    std::vector<IrregularRow> irregular_;
    mutable std::unordered_map<std::string, std::size_t> row_index_;
    mutable bool index_built_ = false;
};

enum class SampleClass : std::uint8_t {
    Pristine = 0,
    Fake = 1,
};

struct PredictionRecord {
    std::string sample_id;
    SampleClass truth = SampleClass::Pristine;
    SampleClass predicted = SampleClass::Pristine;
    std::optional<double> score;
};

struct PredictionSet {
    std::vector<PredictionRecord> records;

    std::size_t size() const { return records.size(); }
    std::uint64_t digest() const;
};

struct DatasetManifest {
    std::string name;
    std::unordered_map<std::string, std::string> identity_of;
};

// A finding produced by validation; validation never throws.
struct ValidationFinding {
    enum class Kind { WrongArity, InvalidLabel, DuplicateId };
    Kind kind;
    std::size_t row;
    std::string sample_id;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;

    bool ok() const { return findings.empty(); }
    std::size_t count(ValidationFinding::Kind kind) const;
};

ValidationReport validate_annotations(const AnnotationTable& table,
                                      const AttributeRegistry& registry);

enum class JoinPolicy {
    Strict,    // id sets must be equal
    Intersect, // keep ids present in both inputs
};

// Annotations joined with predictions over a common sample set. Storage is
// flattened so the audit can stream it without indirection. Immutable after
// construction; safe to share across threads.
class AuditDataset {
public:
    AuditDataset(const AttributeRegistry& registry,
                 std::vector<std::string> ids,
                 std::vector<std::int8_t> labels,
                 std::vector<std::uint8_t> truth_fake,
                 std::vector<std::uint8_t> predicted_fake);

    const AttributeRegistry& registry() const { return *registry_; }
    std::size_t size() const { return ids_.size(); }
    std::size_t attribute_count() const { return width_; }

    const std::vector<std::string>& sample_ids() const { return ids_; }
    std::int8_t label(std::size_t row, std::size_t attribute) const {
        return labels_[row * width_ + attribute];
    }
    std::span<const std::int8_t> labels() const { return labels_; }
    bool truth_is_fake(std::size_t row) const { return truth_fake_[row] != 0; }
    bool predicted_fake(std::size_t row) const { return predicted_fake_[row] != 0; }
    bool misclassified(std::size_t row) const {
        return truth_fake_[row] != predicted_fake_[row];
    }

    std::uint64_t label_digest() const;
    std::uint64_t prediction_digest() const;

    AnnotationTable annotations_copy() const;
    PredictionSet predictions_copy() const;

private:
    const AttributeRegistry* registry_;
    std::size_t width_;
    std::vector<std::string> ids_;
    std::vector<std::int8_t> labels_;
    std::vector<std::uint8_t> truth_fake_;
    std::vector<std::uint8_t> predicted_fake_;
};

// Joins annotations with predictions. Strict requires identical id sets and
// raises MismatchedIds with the symmetric-difference count; Intersect keeps
// the common ids in annotation row order.
AuditDataset join(const AnnotationTable& annotations, const PredictionSet& predictions,
                  JoinPolicy policy);

// FNV-1a 64-bit over arbitrary bytes; the checksum used for label digests.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string digest_hex(std::uint64_t digest);

} // namespace dfaudit
