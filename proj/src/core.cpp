#include "dfaudit/core.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>

namespace dfaudit {

namespace {

constexpr std::array<std::string_view, 9> kCategoryNames = {
    "Demographics", "Skin", "Hair", "Beard", "FaceGeometry",
    "Mouth", "Nose", "Accessories", "Other",
};

struct DefaultAttribute {
    const char* name;
    AttributeCategory category;
    bool excluded_low_accuracy;
};

// Order defines the canonical column order of every table and report.
constexpr DefaultAttribute kDefaultAttributes[] = {
    {"Male", AttributeCategory::Demographics, false},
    {"Young", AttributeCategory::Demographics, false},
    {"Middle Aged", AttributeCategory::Demographics, false},
    {"Senior", AttributeCategory::Demographics, false},
    {"Asian", AttributeCategory::Demographics, false},
    {"White", AttributeCategory::Demographics, false},
    {"Black", AttributeCategory::Demographics, false},
    {"Rosy Cheeks", AttributeCategory::Skin, false},
    {"Shiny Skin", AttributeCategory::Skin, false},
    {"Bald", AttributeCategory::Hair, false},
    {"Wavy Hair", AttributeCategory::Hair, false},
    {"Receding Hairline", AttributeCategory::Hair, false},
    {"Bangs", AttributeCategory::Hair, false},
    {"Sideburns", AttributeCategory::Hair, false},
    {"Black Hair", AttributeCategory::Hair, false},
    {"Blond Hair", AttributeCategory::Hair, false},
    {"Brown Hair", AttributeCategory::Hair, false},
    {"Gray Hair", AttributeCategory::Hair, false},
    {"No Beard", AttributeCategory::Beard, false},
    {"Mustache", AttributeCategory::Beard, false},
    {"5'o Clock Shadow", AttributeCategory::Beard, false},
    {"Goatee", AttributeCategory::Beard, false},
    {"Oval Face", AttributeCategory::FaceGeometry, false},
    {"Square Face", AttributeCategory::FaceGeometry, false},
    {"Round Face", AttributeCategory::FaceGeometry, false},
    {"Double Chin", AttributeCategory::FaceGeometry, false},
    {"High Cheekbones", AttributeCategory::FaceGeometry, false},
    {"Chubby", AttributeCategory::FaceGeometry, false},
    {"Obstructed Forehead", AttributeCategory::FaceGeometry, false},
    {"Fully Visible Forehead", AttributeCategory::FaceGeometry, false},
    {"Brown Eyes", AttributeCategory::FaceGeometry, true},
    {"Bags Under Eyes", AttributeCategory::FaceGeometry, true},
    {"Bushy Eyebrows", AttributeCategory::FaceGeometry, false},
    {"Arched Eyebrows", AttributeCategory::FaceGeometry, false},
    {"Mouth Closed", AttributeCategory::Mouth, false},
    {"Smiling", AttributeCategory::Mouth, false},
    {"Big Lips", AttributeCategory::Mouth, false},
    {"Big Nose", AttributeCategory::Nose, false},
    {"Pointy Nose", AttributeCategory::Nose, false},
    {"Heavy Makeup", AttributeCategory::Accessories, false},
    {"Wearing Hat", AttributeCategory::Accessories, false},
    {"Wearing Earrings", AttributeCategory::Accessories, false},
    {"Wearing Necktie", AttributeCategory::Accessories, false},
    {"Wearing Lipstick", AttributeCategory::Accessories, false},
    {"No Eyewear", AttributeCategory::Accessories, false},
    {"Eyeglasses", AttributeCategory::Accessories, false},
    {"Attractive", AttributeCategory::Other, false},
};

} // namespace

std::string_view category_name(AttributeCategory category) {
    return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<AttributeCategory> category_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name) return static_cast<AttributeCategory>(i);
    }
    return std::nullopt;
}

AttributeRegistry::AttributeRegistry(std::vector<AttributeInfo> attributes)
    : attributes_(std::move(attributes)) {
    index_.reserve(attributes_.size());
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        auto [it, inserted] = index_.emplace(attributes_[i].name, i);
        if (!inserted) {
            throw InvalidConfig("duplicate attribute name in registry: " + attributes_[i].name);
        }
    }
}

const AttributeRegistry& AttributeRegistry::default_registry() {
    static const AttributeRegistry registry = [] {
        std::vector<AttributeInfo> attrs;
        attrs.reserve(std::size(kDefaultAttributes));
        for (const auto& a : kDefaultAttributes) {
            attrs.push_back({a.name, a.category, a.excluded_low_accuracy});
        }
        return AttributeRegistry(std::move(attrs));
    }();
    return registry;
}

std::optional<std::size_t> AttributeRegistry::index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

bool AttributeRegistry::operator==(const AttributeRegistry& other) const {
    if (attributes_.size() != other.attributes_.size()) return false;
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name != other.attributes_[i].name) return false;
    }
    return true;
}

AnnotationTable::AnnotationTable(const AttributeRegistry& registry)
    : registry_(&registry), width_(registry.size()) {}

void AnnotationTable::append_row(std::string id, std::span<const std::int8_t> row_cells) {
    if (row_cells.size() != width_) {
        irregular_.push_back({ids_.size(), row_cells.size()});
    }
    ids_.push_back(std::move(id));
    const std::size_t copy = std::min(row_cells.size(), width_);
    const std::size_t base = cells_.size();
    cells_.resize(base + width_, 0);
    std::copy_n(row_cells.begin(), copy, cells_.begin() + static_cast<std::ptrdiff_t>(base));
    index_built_ = false;
}

std::optional<std::size_t> AnnotationTable::find_row(std::string_view id) const {
    if (!index_built_) {
        row_index_.clear();
        row_index_.reserve(ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            row_index_.emplace(ids_[i], i); // first occurrence wins
        }
        index_built_ = true;
    }
    auto it = row_index_.find(std::string(id));
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t AnnotationTable::label_digest() const {
    return fnv1a64(cells_.data(), cells_.size());
}

bool AnnotationTable::operator==(const AnnotationTable& other) const {
    return width_ == other.width_ && ids_ == other.ids_ && cells_ == other.cells_;
}

std::uint64_t PredictionSet::digest() const {
    std::uint64_t d = 0xcbf29ce484222325ULL;
    for (const auto& r : records) {
        d = fnv1a64(r.sample_id.data(), r.sample_id.size(), d);
        const std::uint8_t bits[2] = {static_cast<std::uint8_t>(r.truth),
                                      static_cast<std::uint8_t>(r.predicted)};
        d = fnv1a64(bits, sizeof(bits), d);
    }
    return d;
}

std::size_t ValidationReport::count(ValidationFinding::Kind kind) const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(),
                      [kind](const ValidationFinding& f) { return f.kind == kind; }));
}

ValidationReport validate_annotations(const AnnotationTable& table,
                                      const AttributeRegistry& registry) {
    ValidationReport report;
    for (const auto& irregular : table.irregular_rows()) {
        report.findings.push_back({ValidationFinding::Kind::WrongArity, irregular.row,
                                   table.sample_id(irregular.row),
                                   "row has " + std::to_string(irregular.arity) +
                                       " cells, expected " + std::to_string(registry.size())});
    }
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        for (std::size_t a = 0; a < table.attribute_count(); ++a) {
            const std::int8_t raw = table.raw(r, a);
            if (!is_valid_label(raw)) {
                report.findings.push_back({ValidationFinding::Kind::InvalidLabel, r,
                                           table.sample_id(r),
                                           "invalid label " + std::to_string(raw) +
                                               " for attribute '" + registry.at(a).name + "'"});
            }
        }
    }
    std::unordered_map<std::string_view, std::size_t> seen;
    seen.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        auto [it, inserted] = seen.emplace(table.sample_id(r), r);
        if (!inserted) {
            report.findings.push_back({ValidationFinding::Kind::DuplicateId, r,
                                       table.sample_id(r),
                                       "duplicate of row " + std::to_string(it->second)});
        }
    }
    return report;
}

AuditDataset::AuditDataset(const AttributeRegistry& registry,
                           std::vector<std::string> ids,
                           std::vector<std::int8_t> labels,
                           std::vector<std::uint8_t> truth_fake,
                           std::vector<std::uint8_t> predicted_fake)
    : registry_(&registry),
      width_(registry.size()),
      ids_(std::move(ids)),
      labels_(std::move(labels)),
      truth_fake_(std::move(truth_fake)),
      predicted_fake_(std::move(predicted_fake)) {
    if (labels_.size() != ids_.size() * width_ || truth_fake_.size() != ids_.size() ||
        predicted_fake_.size() != ids_.size()) {
        throw InvalidConfig("audit dataset arrays have inconsistent sizes");
    }
}

std::uint64_t AuditDataset::label_digest() const {
    return fnv1a64(labels_.data(), labels_.size());
}

std::uint64_t AuditDataset::prediction_digest() const {
    std::uint64_t d = fnv1a64(truth_fake_.data(), truth_fake_.size());
    return fnv1a64(predicted_fake_.data(), predicted_fake_.size(), d);
}

AnnotationTable AuditDataset::annotations_copy() const {
    AnnotationTable table(*registry_);
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        table.append_row(ids_[r], {labels_.data() + r * width_, width_});
    }
    return table;
}

PredictionSet AuditDataset::predictions_copy() const {
    PredictionSet set;
    set.records.reserve(ids_.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        set.records.push_back({ids_[r],
                               truth_fake_[r] ? SampleClass::Fake : SampleClass::Pristine,
                               predicted_fake_[r] ? SampleClass::Fake : SampleClass::Pristine,
                               std::nullopt});
    }
    return set;
}

AuditDataset join(const AnnotationTable& annotations, const PredictionSet& predictions,
                  JoinPolicy policy) {
    std::unordered_map<std::string_view, std::size_t> pred_index;
    pred_index.reserve(predictions.records.size());
    for (std::size_t i = 0; i < predictions.records.size(); ++i) {
        pred_index.emplace(predictions.records[i].sample_id, i); // first occurrence wins
    }

    std::vector<std::string> ids;
    std::vector<std::int8_t> labels;
    std::vector<std::uint8_t> truth;
    std::vector<std::uint8_t> predicted;
    std::size_t matched = 0;

    for (std::size_t r = 0; r < annotations.row_count(); ++r) {
        auto it = pred_index.find(annotations.sample_id(r));
        if (it == pred_index.end()) continue;
        ++matched;
        const auto& record = predictions.records[it->second];
        ids.push_back(annotations.sample_id(r));
        const auto row = annotations.row(r);
        labels.insert(labels.end(), row.begin(), row.end());
        truth.push_back(record.truth == SampleClass::Fake ? 1 : 0);
        predicted.push_back(record.predicted == SampleClass::Fake ? 1 : 0);
    }

    if (policy == JoinPolicy::Strict) {
        const std::size_t annotation_only = annotations.row_count() - matched;
        const std::size_t prediction_only = pred_index.size() - matched;
        if (annotation_only + prediction_only != 0) {
            throw MismatchedIds(annotation_only + prediction_only);
        }
    }

    return AuditDataset(annotations.registry(), std::move(ids), std::move(labels),
                        std::move(truth), std::move(predicted));
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string digest_hex(std::uint64_t digest) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(digest));
    return buffer;
}

} // namespace dfaudit
