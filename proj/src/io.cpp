#include "plsr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plsr {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericError("cannot serialize non-finite number");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(it.key()).dump() + ": ";
        dump_value(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(item, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json_fixed(const json& j, int indent) {
  std::string out;
  dump_value(j, out, indent, 0);
  out += "\n";
  return out;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for writing: " + tmp.string());
    os << content;
    if (!os.flush()) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError("bad numeric cell in " + path.string() + ": '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("ragged CSV: " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return m;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(i, c));
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  const Matrix m = read_csv_matrix(path);
  if (m.size() > 0 && m.cols() != 1) throw DataError("labels CSV must have one column");
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (v != std::floor(v)) throw DataError("labels must be integers");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw DataError("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  atomic_write_file(path, dump_json_fixed(j));
}

EpochDataset read_epoch_dir(const std::filesystem::path& dir) {
  const json manifest = read_json_file(dir / "manifest.json");
  EpochDataset ds;
  try {
    ds.n_trials = manifest.at("n_trials").get<int>();
    ds.n_channels = manifest.at("n_channels").get<int>();
    ds.n_samples = manifest.at("n_samples").get<int>();
    ds.fs = manifest.at("fs").get<double>();
    ds.class_count = manifest.at("class_count").get<int>();
    ds.labels = manifest.at("labels").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw DataError("bad epoch manifest in " + dir.string() + ": " + e.what());
  }
  const std::filesystem::path data_path = dir / "data.f64";
  std::ifstream is(data_path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + data_path.string());
  const std::size_t count =
      static_cast<std::size_t>(ds.n_trials) * ds.n_channels * ds.n_samples;
  ds.data.resize(count);
  is.read(reinterpret_cast<char*>(ds.data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(is.gcount()) != count * sizeof(double))
    throw DataError("data.f64 shorter than manifest promises: " + data_path.string());
  is.get();
  if (!is.eof()) throw DataError("data.f64 longer than manifest promises: " + data_path.string());
  ds.validate();
  return ds;
}

void write_epoch_dir(const std::filesystem::path& dir, const EpochDataset& ds) {
  ds.validate();
  std::filesystem::create_directories(dir);
  json manifest{{"n_trials", ds.n_trials},
                {"n_channels", ds.n_channels},
                {"n_samples", ds.n_samples},
                {"fs", ds.fs},
                {"class_count", ds.class_count},
                {"labels", ds.labels}};
  write_json_file(dir / "manifest.json", manifest);
  std::string bytes(reinterpret_cast<const char*>(ds.data.data()),
                    ds.data.size() * sizeof(double));
  atomic_write_file(dir / "data.f64", bytes);
}

json trace_to_json(const Trace& trace) {
  json records = json::array();
  for (const IterationRecord& r : trace.records) {
    records.push_back({{"iter", r.iter},
                       {"cost", r.cost},
                       {"grad_norm", r.grad_norm},
                       {"step", r.step},
                       {"backtracks", r.backtracks},
                       {"elapsed_s", 0.0}});
  }
  return records;
}

Trace trace_from_json(const json& j) {
  Trace trace;
  for (const json& r : j) {
    trace.records.push_back({r.at("iter").get<int>(), r.at("cost").get<double>(),
                             r.at("grad_norm").get<double>(), r.at("step").get<double>(),
                             r.at("backtracks").get<int>(),
                             r.at("elapsed_s").get<double>()});
  }
  return trace;
}

std::vector<double> matrix_to_flat(const Matrix& m) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(i, c));
  return v;
}

Matrix matrix_from_flat(const std::vector<double>& v, int rows, int cols) {
  if (v.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw DataError("flat array length does not match declared shape");
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = v[idx++];
  return m;
}

json model_to_json(const PlsrModel& model) {
  json j;
  j["format"] = "plsr-model";
  j["version"] = 1;
  j["variant"] = to_string(model.variant);
  j["rank"] = model.rank;
  j["n"] = static_cast<int>(model.u.rows());
  j["m"] = static_cast<int>(model.v.rows());
  j["u"] = matrix_to_flat(model.u);
  j["v"] = matrix_to_flat(model.v);
  j["s"] = matrix_to_flat(model.s);
  j["coeffs"] = matrix_to_flat(model.coeffs);
  j["mean_x"] = std::vector<double>(model.mean_x.data(),
                                    model.mean_x.data() + model.mean_x.size());
  j["mean_y"] = std::vector<double>(model.mean_y.data(),
                                    model.mean_y.data() + model.mean_y.size());
  j["fit_trace"] = {{"termination_reason", to_string(model.fit_trace.reason)},
                    {"records", trace_to_json(model.fit_trace)}};
  return j;
}

PlsrModel model_from_json(const json& j) {
  PlsrModel model;
  try {
    if (j.at("format").get<std::string>() != "plsr-model")
      throw DataError("not a model file");
    model.variant = variant_from_string(j.at("variant").get<std::string>());
    model.rank = j.at("rank").get<int>();
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    model.u = matrix_from_flat(j.at("u").get<std::vector<double>>(), n, model.rank);
    model.v = matrix_from_flat(j.at("v").get<std::vector<double>>(), m, model.rank);
    model.s = matrix_from_flat(j.at("s").get<std::vector<double>>(), model.rank, model.rank);
    model.coeffs = matrix_from_flat(j.at("coeffs").get<std::vector<double>>(), n, m);
    const auto mx = j.at("mean_x").get<std::vector<double>>();
    const auto my = j.at("mean_y").get<std::vector<double>>();
    model.mean_x = Eigen::Map<const Vector>(mx.data(), static_cast<Eigen::Index>(mx.size()));
    model.mean_y = Eigen::Map<const Vector>(my.data(), static_cast<Eigen::Index>(my.size()));
    const json& tj = j.at("fit_trace");
    model.fit_trace = trace_from_json(tj.at("records"));
    const std::string reason = tj.at("termination_reason").get<std::string>();
    if (reason == "gradient_tolerance")
      model.fit_trace.reason = TerminationReason::gradient_tolerance;
    else if (reason == "line_search_failure")
      model.fit_trace.reason = TerminationReason::line_search_failure;
    else
      model.fit_trace.reason = TerminationReason::max_iters;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
  return model;
}

void write_model_file(const std::filesystem::path& path, const PlsrModel& model) {
  write_json_file(path, model_to_json(model));
}

PlsrModel read_model_file(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace plsr
