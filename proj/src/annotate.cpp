#include "dfaudit/annotate.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <unordered_map>
#include <unordered_set>

namespace dfaudit {

namespace {

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace

AnnotationTable apply_confidence_filter(std::span<const ConfidenceRecord> records,
                                        const FilterConfig& config,
                                        const AttributeRegistry& registry) {
    const std::size_t width = registry.size();
    std::vector<std::string> ids;
    std::vector<std::int8_t> cells;
    std::unordered_map<std::string, std::size_t> row_of;
    std::unordered_set<std::uint64_t> seen_pairs;
    seen_pairs.reserve(records.size());

    for (const auto& record : records) {
        const auto attr = registry.index_of(record.attribute);
        if (!attr) throw UnknownAttribute(record.attribute);

        std::size_t row;
        auto it = row_of.find(record.sample_id);
        if (it == row_of.end()) {
            row = ids.size();
            row_of.emplace(record.sample_id, row);
            ids.push_back(record.sample_id);
            cells.resize(cells.size() + width, 0);
        } else {
            row = it->second;
        }

        const std::uint64_t pair_key = static_cast<std::uint64_t>(row) * width + *attr;
        if (!seen_pairs.insert(pair_key).second) {
            throw DuplicatePair(record.sample_id, record.attribute);
        }

        if (record.confidence >= config.threshold) {
            cells[row * width + *attr] = static_cast<std::int8_t>(record.decision);
        }
        // below threshold: stays Undefined
    }

    AnnotationTable table(registry);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        table.append_row(std::move(ids[r]), {cells.data() + r * width, width});
    }
    return table;
}

std::vector<ConfidenceRecord> load_confidences(std::istream& source) {
    std::string line;
    if (!read_line(source, line)) {
        throw HeaderMismatch("confidence input is empty");
    }
    if (line != "sample_id,attribute,decision,confidence") {
        throw HeaderMismatch("expected header sample_id,attribute,decision,confidence");
    }
    std::vector<ConfidenceRecord> records;
    std::size_t line_no = 1;
    while (read_line(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        // attribute names may not contain commas, so a plain split is safe
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        const std::size_t c3 = c2 == std::string::npos ? std::string::npos : line.find(',', c2 + 1);
        if (c3 == std::string::npos || line.find(',', c3 + 1) != std::string::npos) {
            throw ParseError(line_no, 1, "expected 4 fields");
        }
        ConfidenceRecord record;
        record.sample_id = line.substr(0, c1);
        record.attribute = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string decision = line.substr(c2 + 1, c3 - c2 - 1);
        if (decision == "1") record.decision = TernaryLabel::Positive;
        else if (decision == "-1") record.decision = TernaryLabel::Negative;
        else throw ParseError(line_no, 3, "decision must be 1 or -1");
        const std::string conf = line.substr(c3 + 1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(conf.data(), conf.data() + conf.size(), value);
        if (ec != std::errc() || ptr != conf.data() + conf.size() || value < 0.0 || value > 1.0) {
            throw ParseError(line_no, 4, "confidence must be a real in [0,1]");
        }
        record.confidence = value;
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<ConfidenceRecord> load_confidences_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + path);
    return load_confidences(in);
}

std::string CorrectnessReport::macro_summary() const {
    char buffer[64];
    auto fmt = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "n/a";
        std::snprintf(buffer, sizeof(buffer), "%.2f", *v);
        return buffer;
    };
    std::snprintf(buffer, sizeof(buffer), "%.2f", macro_accuracy);
    std::string out = buffer;
    out += ' ';
    out += fmt(macro_precision);
    out += ' ';
    out += fmt(macro_recall);
    return out;
}

CorrectnessReport correctness_study(const AnnotationTable& generated,
                                    const AnnotationTable& human) {
    if (!(generated.registry() == human.registry())) {
        throw InvalidConfig("correctness study requires both tables to share a registry");
    }
    const std::size_t width = generated.attribute_count();

    struct Counts {
        std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
        std::uint64_t total() const { return tp + tn + fp + fn; }
    };
    std::vector<Counts> counts(width);

    for (std::size_t r = 0; r < generated.row_count(); ++r) {
        const auto h_row = human.find_row(generated.sample_id(r));
        if (!h_row) continue;
        for (std::size_t a = 0; a < width; ++a) {
            const std::int8_t g = generated.raw(r, a);
            const std::int8_t h = human.raw(*h_row, a);
            if (g == 0 || h == 0) continue;
            Counts& c = counts[a];
            if (g == 1 && h == 1) c.tp++;
            else if (g == 1 && h == -1) c.fp++;
            else if (g == -1 && h == 1) c.fn++;
            else c.tn++;
        }
    }

    CorrectnessReport report;
    double accuracy_sum = 0.0;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    std::size_t precision_n = 0;
    std::size_t recall_n = 0;
    for (std::size_t a = 0; a < width; ++a) {
        const Counts& c = counts[a];
        if (c.total() == 0) throw NoOverlap(generated.registry().at(a).name);
        CorrectnessRow row;
        row.attribute = generated.registry().at(a).name;
        row.support = c.total();
        row.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
        if (c.tp + c.fp > 0) {
            row.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
            precision_sum += *row.precision;
            ++precision_n;
        }
        if (c.tp + c.fn > 0) {
            row.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
            recall_sum += *row.recall;
            ++recall_n;
        }
        accuracy_sum += row.accuracy;
        report.rows.push_back(std::move(row));
    }
    report.macro_accuracy = accuracy_sum / static_cast<double>(width);
    if (precision_n > 0) report.macro_precision = precision_sum / static_cast<double>(precision_n);
    if (recall_n > 0) report.macro_recall = recall_sum / static_cast<double>(recall_n);
    return report;
}

} // namespace dfaudit
