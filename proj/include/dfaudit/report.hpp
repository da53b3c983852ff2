#pragma once

#include <string>
#include <vector>

#include "dfaudit/annotate.hpp"
#include "dfaudit/bias.hpp"
#include "dfaudit/stats.hpp"

namespace dfaudit {

enum class RenderFormat { Text, Json, Csv, Svg };

struct RenderOptions {
    RenderFormat format = RenderFormat::Text;
    int percent_decimals = 2;
    bool legacy_sentinels = false;
};

// "-92.70%" style formatting of a fraction; used by every renderer.
std::string format_percent(double fraction, int decimals);

// Sentinel spelling. Legacy mode reproduces the historical table strings
// ("All correct" when both groups are perfect, "All wrong" when only the
// negative group is perfect); the default spells the case out.
std::string format_rp(const RPValue& value, const RenderOptions& options);

// Detailed error table: per attribute a Positive, a Negative and a
// Rel. Perf. row across (balanced, fake, pristine) x (data, control)
// columns. Works for Text and Csv formats; Json renders the full report.
std::string render_table(const BiasReport& report, const RenderOptions& options);

// Machine-readable report (schema documented in the README).
std::string report_to_json_text(const BiasReport& report);
BiasReport report_from_json_text(const std::string& text);

enum class ScatterKind { RpVsCrp, PdrpVsDdrp };

struct ScatterPoint {
    std::string attribute;
    double x = 0.0; // fraction, not percent
    double y = 0.0;
};

struct ScatterSkipped {
    std::string attribute;
    std::string reason;
};

struct ScatterData {
    std::string x_label;
    std::string y_label;
    std::vector<ScatterPoint> points;    // rows with finite coordinates
    std::vector<ScatterSkipped> skipped; // sentinel rows, listed separately
};

// RpVsCrp plots RP against CRP (x = CRP, y = RP); PdrpVsDdrp plots the
// pristine-only CRP against the fake-only CRP (x = DDRP, y = PDRP).
ScatterData scatter_data(const BiasReport& report, ScatterKind kind);

// CSV columns `attribute,x,y`; values as percents with the configured
// precision.
std::string render_scatter_csv(const ScatterData& data, const RenderOptions& options);
std::string render_scatter_json(const ScatterData& data, const RenderOptions& options);

// Standalone SVG with axes, the bisectrix, quadrant shading and one marker
// per attribute. Output is deterministic: no timestamps, stable ordering.
std::string render_scatter_svg(const ScatterData& data, const RenderOptions& options);

std::string render_distribution_json(const DistributionSummary& summary);
std::string render_correlations_csv(const AttributeRegistry& registry,
                                    const TopCorrelations& top);
std::string render_correlation_matrix_csv(const AttributeRegistry& registry,
                                          const CorrelationMatrix& matrix);
std::string render_correctness_text(const CorrectnessReport& report);

} // namespace dfaudit
