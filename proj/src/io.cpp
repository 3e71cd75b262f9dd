#include "wassid/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wassid {

namespace {

std::invalid_argument input_error(const std::filesystem::path& path,
                                  const std::string& what) {
  return std::invalid_argument(path.string() + ": " + what);
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows,
                                 const char* label) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw std::invalid_argument(std::string(label) +
                                " must be an array of arrays");
  }
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const nlohmann::json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw std::invalid_argument(std::string(label) + " rows have mixed sizes");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& values,
                                 const char* label) {
  if (!values.is_array() || values.empty()) {
    throw std::invalid_argument(std::string(label) +
                                " must be a non-empty array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = values[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) values.push_back(v(i));
  return values;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::string format_sig(double value, int digits) {
  std::array<char, 48> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", digits, value);
  return std::string(buf.data());
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error(path, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    const std::size_t stop = std::min(e.byte, content.size());
    for (std::size_t pos = 0; pos < stop; ++pos) {
      if (content[pos] == '\n') ++line;
    }
    throw input_error(path, "parse error at line " + std::to_string(line) +
                                ": " + e.what());
  }
}

nlohmann::json to_json(const GaussianMeasure& g) {
  return {{"dim", g.dim()},
          {"mean", vector_to_json(g.mean)},
          {"cov", matrix_to_json(g.cov)}};
}

nlohmann::json to_json(const EmpiricalMeasure& e) {
  return {{"dim", e.dim()},
          {"points", matrix_to_json(e.points)},
          {"weights", vector_to_json(e.weights)}};
}

GaussianMeasure gaussian_from_json(const nlohmann::json& j) {
  GaussianMeasure g;
  g.mean = vector_from_json(j.at("mean"), "mean");
  g.cov = matrix_from_json(j.at("cov"), "cov");
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != g.dim()) {
    throw std::invalid_argument("declared dim does not match mean length");
  }
  validate(g);
  return g;
}

EmpiricalMeasure empirical_from_json(const nlohmann::json& j) {
  EmpiricalMeasure e;
  e.points = matrix_from_json(j.at("points"), "points");
  if (j.contains("weights")) {
    e.weights = vector_from_json(j.at("weights"), "weights");
  } else {
    e.weights = Eigen::VectorXd::Constant(
        e.size(), 1.0 / static_cast<double>(e.size()));
  }
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != e.dim()) {
    throw std::invalid_argument("declared dim does not match point width");
  }
  validate(e);
  return e;
}

SnapshotFile read_snapshot_file(const std::filesystem::path& path) {
  const nlohmann::json doc = read_json_file(path);
  if (!doc.contains("snapshots") || !doc.at("snapshots").is_array() ||
      doc.at("snapshots").empty()) {
    throw input_error(path, "missing non-empty \"snapshots\" array");
  }
  SnapshotFile out;
  try {
    for (const nlohmann::json& snap : doc.at("snapshots")) {
      if (snap.contains("mean")) {
        out.gaussians.push_back(gaussian_from_json(snap));
      } else if (snap.contains("points")) {
        out.empiricals.push_back(empirical_from_json(snap));
      } else {
        throw std::invalid_argument(
            "snapshot is neither gaussian (mean/cov) nor empirical (points)");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw input_error(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw input_error(path, e.what());
  }
  if (!out.gaussians.empty() && !out.empiricals.empty()) {
    throw input_error(path, "file mixes gaussian and empirical snapshots");
  }
  return out;
}

nlohmann::json snapshots_to_json(const std::vector<GaussianMeasure>& snapshots) {
  nlohmann::json arr = nlohmann::json::array();
  for (const GaussianMeasure& g : snapshots) arr.push_back(to_json(g));
  return {{"snapshots", std::move(arr)}};
}

nlohmann::json snapshots_to_json(const std::vector<EmpiricalMeasure>& snapshots) {
  nlohmann::json arr = nlohmann::json::array();
  for (const EmpiricalMeasure& e : snapshots) arr.push_back(to_json(e));
  return {{"snapshots", std::move(arr)}};
}

std::vector<std::string> matrix_param_names(Eigen::Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 1; r <= d; ++r) {
    for (Eigen::Index c = 1; c <= d; ++c) {
      names.push_back("a" + std::to_string(r) + std::to_string(c));
    }
  }
  return names;
}

std::vector<std::string> theta_param_names(Eigen::Index n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 1; i <= n; ++i) names.push_back("t" + std::to_string(i));
  return names;
}

std::string trace_csv(const FitTrace& trace,
                      const std::vector<std::string>& param_names) {
  std::string out = "iter,cost,grad_norm";
  for (const std::string& name : param_names) {
    out += ",";
    out += name;
  }
  out += "\n";
  for (const TraceRow& row : trace.rows) {
    out += std::to_string(row.iter);
    out += ",";
    out += format_double(row.cost);
    out += ",";
    out += format_double(row.grad_norm);
    for (Eigen::Index i = 0; i < row.params.size(); ++i) {
      out += ",";
      out += format_double(row.params(i));
    }
    out += "\n";
  }
  return out;
}

std::string coupling_csv(const Coupling& c) {
  std::string out = "row,col,mass\n";
  for (Eigen::Index r = 0; r < c.plan.rows(); ++r) {
    for (Eigen::Index k = 0; k < c.plan.cols(); ++k) {
      if (c.plan(r, k) > 0.0) {
        out += std::to_string(r);
        out += ",";
        out += std::to_string(k);
        out += ",";
        out += format_double(c.plan(r, k));
        out += "\n";
      }
    }
  }
  return out;
}

std::string dense_matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ",";
      out += format_double(m(r, c));
    }
    out += "\n";
  }
  return out;
}

}  // namespace wassid
