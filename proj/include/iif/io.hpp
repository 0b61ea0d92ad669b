#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iif/datagen.hpp"
#include "iif/metrics.hpp"
#include "iif/pipeline.hpp"
#include "iif/types.hpp"

namespace iif::io {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "1.0.0";

using Json = nlohmann::ordered_json;

struct LoadOptions {
    char delimiter = 0;                 // 0 picks tab for .tsv/.txt files with tabs, comma otherwise
    std::optional<bool> has_header;     // unset: header iff the first row has a non-numeric cell
    bool log1p = false;
    bool transpose = false;             // file is features x observations
};

struct DataMatrix {
    Matrix values;                      // n x p after transposition
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;   // empty when the file had no header
    bool log1p = false;
    bool transposed = false;
};

/// Reads a CSV/TSV matrix. Cells may be RFC-4180 quoted. When the first data
/// row starts with a non-numeric cell, the first column is taken as row ids.
DataMatrix load_matrix(const std::string& path, const LoadOptions& options = {});

/// Writes values with 17 significant digits, one row per line, optional header.
void save_matrix(const std::string& path, const Matrix& values, const std::vector<std::string>& col_ids = {},
                 char delimiter = ',');

/// One 1-based integer per line.
void write_labels(const std::string& path, const Labels& labels);

/// Reads one label per line. Integer labels keep their order; other tokens are
/// numbered by first appearance. Returns 0-based consecutive codes.
Labels read_labels(const std::string& path);

/// One 1-based index per line, followed by the column id when ids exist.
void write_features(const std::string& path, const FeatureSet& features, const std::vector<std::string>& col_ids = {});

/// Reads 1-based indices (first field of each line) into a 0-based set.
FeatureSet read_features(const std::string& path, std::size_t p);

std::string quote_csv(const std::string& field);

// Synthetic instance files: x.csv, labels.txt, features.txt, strong.txt, weak.txt, spec.json.
Json spec_to_json(datagen::Setting setting, const datagen::SyntheticSpec& spec, const datagen::ManifoldParams& params);
void spec_from_json(const Json& j, datagen::Setting& setting, datagen::SyntheticSpec& spec,
                    datagen::ManifoldParams& params);
void write_instance(const std::string& dir, const datagen::SyntheticInstance& inst,
                    const datagen::ManifoldParams& params);

struct ReportInputs {
    std::string input_path;
    const DataMatrix* data = nullptr;
    const pipeline::PipelineConfig* config = nullptr;
    const pipeline::PipelineResult* result = nullptr;
    std::optional<double> accuracy;
    std::optional<double> ari;
    std::optional<metrics::FeatureSelectionReport> features;
    std::optional<double> load_seconds;  // timings block omitted when unset
    std::optional<double> fit_seconds;
};

Json build_report(const ReportInputs& in);
std::string dump_report(const Json& report);
/// Parses a report and checks its schema version.
Json parse_report(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace iif::io
