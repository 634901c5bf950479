#pragma once

#include "plsr/pipeline.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace plsr {

using json = nlohmann::json;

/// Serializes with doubles printed at 17 significant digits ("%.17g"), so
/// files round-trip exactly and diffs stay meaningful. Throws on NaN/inf.
std::string dump_json_fixed(const json& j, int indent = 2);

/// Writes via a temp file in the same directory followed by rename.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// --- CSV (comma separated, no header, one row per record) ---

Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

std::vector<int> read_labels_csv(const std::filesystem::path& path);

// --- epoch directory: manifest.json + data.f64 (little-endian doubles,
// trial-major, then channel, then sample) ---

EpochDataset read_epoch_dir(const std::filesystem::path& dir);
void write_epoch_dir(const std::filesystem::path& dir, const EpochDataset& ds);

// --- model / trace JSON ---

/// Per-iteration records with fields iter, cost, grad_norm, step, backtracks,
/// elapsed_s. elapsed_s is serialized as 0 so written traces are
/// byte-reproducible across runs; wall-clock timing is reported by the
/// commands that measure it.
json trace_to_json(const Trace& trace);
Trace trace_from_json(const json& j);

json model_to_json(const PlsrModel& model);
PlsrModel model_from_json(const json& j);

void write_model_file(const std::filesystem::path& path, const PlsrModel& model);
PlsrModel read_model_file(const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

// row-major flattening used by the model schema
std::vector<double> matrix_to_flat(const Matrix& m);
Matrix matrix_from_flat(const std::vector<double>& v, int rows, int cols);

}  // namespace plsr
