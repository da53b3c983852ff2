#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfaudit/core.hpp"
#include "dfaudit/stats.hpp"

namespace dfaudit {

enum class ErrorSlice : std::uint8_t {
    Balanced,     // mean of the fake and pristine error rates
    FakeOnly,     // fraction of fake samples predicted pristine
    PristineOnly, // fraction of pristine samples predicted fake
};

std::string_view slice_name(ErrorSlice slice);

// Error rates of a positive/negative group pair for one slice. Counts are
// the group sizes (labelled samples), which control groups are matched to.
struct ErrorPair {
    double err_pos = 0.0;
    double err_neg = 0.0;
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
};

struct ControlGroupSpec {
    std::uint64_t seed = 0;
    std::uint32_t reps = 1;
    bool replacement = false;
};

// Outcome of a performance-ratio metric. Division by a zero error rate is
// never silently mapped to a number; the degenerate cases carry explicit
// sentinels instead. A perfect positive group with an erring negative group
// stays Finite(+1).
struct RPValue {
    enum class Kind : std::uint8_t { Finite, NegGroupPerfect, BothPerfect, Degenerate };
    enum class Side : std::uint8_t { None, Data, Control, Both };

    Kind kind = Kind::Degenerate;
    double value = 0.0;     // meaningful only when kind == Finite
    Side side = Side::None; // which input degenerated, for corrected metrics

    static RPValue finite(double v) { return {Kind::Finite, v, Side::None}; }
    static RPValue neg_group_perfect(Side side = Side::None) {
        return {Kind::NegGroupPerfect, 0.0, side};
    }
    static RPValue both_perfect(Side side = Side::None) {
        return {Kind::BothPerfect, 0.0, side};
    }
    static RPValue degenerate(Side side = Side::None) {
        return {Kind::Degenerate, 0.0, side};
    }

    bool is_finite() const { return kind == Kind::Finite; }

    bool operator==(const RPValue& other) const {
        if (kind != other.kind || side != other.side) return false;
        return kind != Kind::Finite || value == other.value;
    }
};

// RP = 1 - err+/err-; zero means the attribute does not affect performance,
// positive values mean lower error for the positive group.
RPValue relative_performance(const ErrorPair& pair);

// CRP = err_ctl+/err_ctl- - err_dat+/err_dat-, algebraically identical to
// RP_data - RP_control when both ratios exist.
RPValue corrected_relative_performance(const ErrorPair& data, const ErrorPair& control);

// Error rates of the attribute-positive and attribute-negative groups for a
// slice. Undefined labels belong to neither group. Throws DegenerateGroup
// when a group is empty or lacks a truth class required by the slice.
ErrorPair group_error_rates(const AuditDataset& dataset, std::size_t attribute,
                            ErrorSlice slice);

struct ControlDraw {
    std::vector<std::uint32_t> positive; // sample indices, size n_pos
    std::vector<std::uint32_t> negative; // sample indices, size n_neg
};

// Control groups matched in size to the labelled groups, drawn uniformly
// from the whole joined set (not from the labelled subsets). The stream is
// keyed by (seed, attribute, rep): per-attribute results do not depend on
// which other attributes are audited.
std::vector<ControlDraw> sample_control_groups(const AuditDataset& dataset,
                                               std::size_t attribute,
                                               const ControlGroupSpec& spec);

struct Degeneracy {
    ErrorSlice slice;
    std::string source; // "data" or "control"
    std::string group;  // "positive" or "negative"
    std::string missing;
};

struct SliceSet {
    std::optional<ErrorPair> balanced;
    std::optional<ErrorPair> fake;
    std::optional<ErrorPair> pristine;

    const std::optional<ErrorPair>& of(ErrorSlice slice) const {
        switch (slice) {
            case ErrorSlice::FakeOnly: return fake;
            case ErrorSlice::PristineOnly: return pristine;
            default: return balanced;
        }
    }
};

// Sample standard deviation of the control error rates across reps,
// reported when reps > 1.
struct SliceStd {
    std::optional<double> pos;
    std::optional<double> neg;
};

struct BiasRow {
    std::string attribute;
    AttributeCategory category = AttributeCategory::Other;
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
    SliceSet data;
    SliceSet control;
    SliceStd std_balanced, std_fake, std_pristine;
    std::vector<Degeneracy> degenerate;
    RPValue rp_data, rp_control, crp, pdrp, ddrp;
};

struct Provenance {
    std::uint64_t seed = 0;
    std::uint32_t reps = 1;
    bool replacement = false;
    std::uint64_t min_count = 0;
    std::uint64_t n_samples = 0;
    std::string annotations_digest;
    std::string predictions_digest;
};

struct BiasReport {
    std::vector<BiasRow> rows; // registry order, one per kept attribute
    Provenance provenance;
};

// PDRP and DDRP: the corrected relative performance restricted to pristine
// (respectively fake) samples, using the same control draws as the balanced
// audit.
std::pair<RPValue, RPValue> pdrp_ddrp(const AuditDataset& dataset, std::size_t attribute,
                                      const ControlGroupSpec& spec);

// Full per-attribute audit over the kept attributes. Degenerate groups mark
// their row and never abort the audit. Output is a pure function of
// (dataset, kept, spec).
BiasReport audit(const AuditDataset& dataset, const SupportFilterResult& kept,
                 const ControlGroupSpec& spec);

} // namespace dfaudit
