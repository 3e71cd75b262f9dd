#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "wassid/fit.hpp"
#include "wassid/measures.hpp"
#include "wassid/wasserstein.hpp"

namespace wassid {

// Shortest representation that round-trips the exact double.
std::string format_double(double value);
std::string format_sig(double value, int digits);

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

nlohmann::json read_json_file(const std::filesystem::path& path);

nlohmann::json to_json(const GaussianMeasure& g);
nlohmann::json to_json(const EmpiricalMeasure& e);
GaussianMeasure gaussian_from_json(const nlohmann::json& j);
EmpiricalMeasure empirical_from_json(const nlohmann::json& j);

struct SnapshotFile {
  std::vector<GaussianMeasure> gaussians;
  std::vector<EmpiricalMeasure> empiricals;

  bool is_gaussian() const { return !gaussians.empty(); }
  std::size_t size() const {
    return is_gaussian() ? gaussians.size() : empiricals.size();
  }
};

SnapshotFile read_snapshot_file(const std::filesystem::path& path);
nlohmann::json snapshots_to_json(const std::vector<GaussianMeasure>& snapshots);
nlohmann::json snapshots_to_json(const std::vector<EmpiricalMeasure>& snapshots);

std::vector<std::string> matrix_param_names(Eigen::Index d);
std::vector<std::string> theta_param_names(Eigen::Index n);

std::string trace_csv(const FitTrace& trace,
                      const std::vector<std::string>& param_names);
std::string coupling_csv(const Coupling& c);
std::string dense_matrix_csv(const Eigen::MatrixXd& m);

}  // namespace wassid
