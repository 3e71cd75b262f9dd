#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "wassid/baselines.hpp"
#include "wassid/fit.hpp"
#include "wassid/measures.hpp"

namespace wassid {

// Built-in cubic benchmark map on [0,1].
double cubic_benchmark(double x);
PointMap cubic_benchmark_map();
Ar1Config default_ar1_config();
std::vector<EmpiricalMeasure> cubic_snapshots(Eigen::Index grid_n);

struct GaussianFitOptions {
  DescentConfig descent;
  std::string init = "identity";  // identity | average
};

struct EmpiricalFitOptions {
  DescentConfig descent;
  std::string basis = "shifted-monomials-1d";
  std::vector<int> exponents = {3, 1, 0};
  std::vector<double> theta_init;  // empty: family default
  std::vector<int> dump_iters;     // empty: 0,1,2,4,... plus the last iterate
};

struct RunArtifact {
  nlohmann::json document;
  std::filesystem::path run_path;
  FitStatus status = FitStatus::kMaxIters;
};

nlohmann::json descent_to_json(const DescentConfig& cfg);
DescentConfig descent_from_json(const nlohmann::json& j);
GaussianFitOptions gaussian_options_from_json(const nlohmann::json& config);
EmpiricalFitOptions empirical_options_from_json(const nlohmann::json& config);
BasisFamily make_family(const std::string& basis, Eigen::Index dim,
                        const std::vector<int>& exponents);

std::filesystem::path simulate_ar1_run(const Ar1Config& cfg,
                                       const std::filesystem::path& out_dir);
RunArtifact fit_gaussian_run(const std::vector<GaussianMeasure>& snapshots,
                             const GaussianFitOptions& opts,
                             const std::filesystem::path& out_dir);
RunArtifact fit_empirical_run(const std::vector<EmpiricalMeasure>& snapshots,
                              const EmpiricalFitOptions& opts,
                              const std::filesystem::path& out_dir);

struct OtRunResult {
  double distance = 0.0;
  std::filesystem::path coupling_path;  // empty when closed form was used
};
OtRunResult ot_run(const std::filesystem::path& file_a,
                   const std::filesystem::path& file_b, int sample_n,
                   std::uint64_t seed, const std::filesystem::path& out_dir);

struct UlamRunConfig {
  std::string map = "cubic";  // cubic | identity
  UlamGrid grid;
  int k = 1000;
  std::uint64_t seed = 0;
};
RunArtifact ulam_run(const UlamRunConfig& cfg,
                     const std::filesystem::path& out_dir);

struct EdmdRunConfig {
  Eigen::MatrixXd a0;
  Eigen::VectorXd x1;
  int steps = 10;
  std::vector<Eigen::VectorXd> trajectory;  // when set, used instead of a0/x1
  std::string dictionary = "coordinates";   // coordinates | constant
};
RunArtifact edmd_run(const EdmdRunConfig& cfg,
                     const std::filesystem::path& out_dir);

}  // namespace wassid
