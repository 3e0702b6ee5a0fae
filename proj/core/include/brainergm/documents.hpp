#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "brainergm/estimation.hpp"
#include "brainergm/gof.hpp"
#include "brainergm/ingest.hpp"
#include "brainergm/netmetrics.hpp"
#include "brainergm/selection.hpp"

namespace brainergm {

/// Result documents are JSON objects that keep key insertion order, so the
/// same result always serializes to the same bytes.
using Document = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string_view tool_version() noexcept;

// Every document starts with schema_version, kind, tool_version and seed.
// Non-finite reals are written as the strings "NaN", "Infinity", "-Infinity".

Document fit_document(const FitResult& fit);
FitResult fit_from_document(const Document& doc);

/// Plot-data document: per panel and bin the label, observed value and the
/// five-number summary, each on both the raw and the logit scale.
Document gof_plot_data(const GofReport& report);
GofReport gof_from_document(const Document& doc);

Document selection_document(const SelectionTrace& trace);
SelectionTrace selection_from_document(const Document& doc);

Document metrics_document(const MetricReport& report, std::uint64_t seed = 0);
MetricReport metrics_from_document(const Document& doc);

Document ensemble_document(const EnsembleMetrics& metrics, std::uint64_t seed);
EnsembleMetrics ensemble_from_document(const Document& doc);

Document comparison_document(const GroupComparison& cmp);
GroupComparison comparison_from_document(const Document& doc);

/// Summary of a simulation run (statistics, acceptance, diagnostics); the
/// networks themselves are written as separate edge-list files.
struct SampleSummary {
  std::string model;
  StatVector theta;
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  double acceptance_rate = 0.0;
  StatVector mean_statistics;
  std::vector<StatVector> statistics;
  DegeneracyReport diagnostics;

  friend bool operator==(const SampleSummary& a, const SampleSummary& b) {
    return a.model == b.model && a.theta == b.theta && a.seed == b.seed && a.nodes == b.nodes &&
           a.acceptance_rate == b.acceptance_rate && a.mean_statistics == b.mean_statistics &&
           a.statistics == b.statistics && a.diagnostics.degenerate == b.diagnostics.degenerate &&
           a.diagnostics.code == b.diagnostics.code && a.diagnostics.reason == b.diagnostics.reason;
  }
};

SampleSummary summarize_batch(const SampleBatch& batch, const ModelSpec& model, std::span<const double> theta,
                              std::size_t nodes);
Document sample_document(const SampleSummary& summary);
SampleSummary sample_from_document(const Document& doc);

Document threshold_document(const ThresholdResult& result, double s_target, bool absolute);

/// Throws DataError unless `doc` is an object with the supported
/// schema_version and, when `kind` is non-empty, that kind.
void check_document(const Document& doc, std::string_view kind = {});

std::string dump_document(const Document& doc);
Document parse_document(std::string_view text);

void write_result(const Document& doc, const std::filesystem::path& path);
Document read_result(const std::filesystem::path& path);

}  // namespace brainergm
