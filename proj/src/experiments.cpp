#include "wassid/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wassid/errors.hpp"
#include "wassid/io.hpp"
#include "wassid/rng.hpp"
#include "wassid/spd.hpp"
#include "wassid/wasserstein.hpp"

namespace wassid {

namespace {

using Clock = std::chrono::steady_clock;

double wall_ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_json_atomic(const std::filesystem::path& path,
                       const nlohmann::json& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

nlohmann::json terminal_json(const FitTrace& trace,
                             const Eigen::VectorXd& params) {
  nlohmann::json final = {{"params", vector_json(params)}};
  if (!trace.rows.empty()) {
    final["cost"] = trace.rows.back().cost;
    final["grad_norm"] = trace.rows.back().grad_norm;
  } else {
    final["cost"] = nullptr;
    final["grad_norm"] = nullptr;
  }
  return final;
}

std::vector<int> resolve_dump_iters(const std::vector<int>& requested,
                                    int last_iter) {
  std::vector<int> iters;
  if (requested.empty()) {
    iters.push_back(0);
    for (int step = 1; step <= last_iter; step *= 2) iters.push_back(step);
    iters.push_back(last_iter);
  } else {
    iters = requested;
  }
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());
  std::erase_if(iters, [last_iter](int it) { return it < 0 || it > last_iter; });
  return iters;
}

std::string ellipse_csv(const std::vector<GaussianMeasure>& snapshots,
                        const Eigen::MatrixXd& a_final) {
  constexpr int kPoints = 128;
  std::string out = "series,level,idx,x,y\n";
  const auto emit = [&out](const std::string& series, const GaussianMeasure& g) {
    const Eigen::MatrixXd root = sqrt_spd(symmetrized(g.cov));
    for (int level = 1; level <= 2; ++level) {
      for (int idx = 0; idx < kPoints; ++idx) {
        const double angle = 2.0 * std::numbers::pi * idx / kPoints;
        Eigen::Vector2d unit(std::cos(angle), std::sin(angle));
        const Eigen::Vector2d p = g.mean + level * (root * unit);
        out += series;
        out += ",";
        out += std::to_string(level);
        out += ",";
        out += std::to_string(idx);
        out += ",";
        out += format_double(p.x());
        out += ",";
        out += format_double(p.y());
        out += "\n";
      }
    }
  };
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    emit("data_" + std::to_string(k + 1), snapshots[k]);
  }
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    emit("push_" + std::to_string(k + 1),
         gaussian_pushforward_linear(snapshots[k], a_final));
  }
  return out;
}

std::string map_curve_csv(const FitTrace& trace, const BasisFamily& family,
                          const std::vector<int>& iters) {
  constexpr int kGrid = 200;
  std::string out = "iter,x,s\n";
  for (const int iter : iters) {
    const BasisModel model{family,
                           trace.rows[static_cast<std::size_t>(iter)].params};
    for (int t = 0; t < kGrid; ++t) {
      const double x = static_cast<double>(t) / (kGrid - 1);
      Eigen::VectorXd xv(1);
      xv(0) = x;
      out += std::to_string(iter);
      out += ",";
      out += format_double(x);
      out += ",";
      out += format_double(model.apply(xv)(0));
      out += "\n";
    }
  }
  return out;
}

std::string density_csv(const FitTrace& trace, const BasisFamily& family,
                        const EmpiricalMeasure& first,
                        const std::vector<int>& iters) {
  constexpr int kBins = 50;
  std::string out = "iter,bin_lo,bin_hi,density\n";
  for (const int iter : iters) {
    const BasisModel model{family,
                           trace.rows[static_cast<std::size_t>(iter)].params};
    const EmpiricalMeasure push = empirical_pushforward(
        first, [&model](const Eigen::VectorXd& x) { return model.apply(x); });
    double lo = push.points.col(0).minCoeff();
    double hi = push.points.col(0).maxCoeff();
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / kBins;
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(kBins);
    for (Eigen::Index p = 0; p < push.size(); ++p) {
      Eigen::Index bin = static_cast<Eigen::Index>(
          std::floor((push.points(p, 0) - lo) / width));
      bin = std::clamp<Eigen::Index>(bin, 0, kBins - 1);
      mass(bin) += push.weights(p);
    }
    for (int bin = 0; bin < kBins; ++bin) {
      out += std::to_string(iter);
      out += ",";
      out += format_double(lo + bin * width);
      out += ",";
      out += format_double(lo + (bin + 1) * width);
      out += ",";
      out += format_double(mass(bin) / width);
      out += "\n";
    }
  }
  return out;
}

}  // namespace

double cubic_benchmark(double x) {
  const double s = 1.0 - x;
  return 0.7 + 0.6 * s - 0.8 * s * s * s;
}

PointMap cubic_benchmark_map() {
  return [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(1);
    y(0) = cubic_benchmark(x(0));
    return y;
  };
}

Ar1Config default_ar1_config() {
  Ar1Config cfg;
  cfg.a0.resize(2, 2);
  cfg.a0 << -0.5, 2.0, -1.0, 1.5;
  cfg.noise_cov = 0.16 * Eigen::MatrixXd::Identity(2, 2);
  cfg.c1 = Eigen::MatrixXd::Identity(2, 2);
  cfg.steps = 6;
  return cfg;
}

std::vector<EmpiricalMeasure> cubic_snapshots(Eigen::Index grid_n) {
  const EmpiricalMeasure grid = uniform_grid_1d(grid_n);
  return {grid, empirical_pushforward(grid, cubic_benchmark_map())};
}

nlohmann::json descent_to_json(const DescentConfig& cfg) {
  return {{"alpha", cfg.step},
          {"max_iters", cfg.max_iters},
          {"grad_tol", cfg.grad_tol},
          {"backtracking",
           {{"enabled", cfg.backtracking.enabled},
            {"shrink", cfg.backtracking.shrink},
            {"sufficient_decrease", cfg.backtracking.sufficient_decrease}}},
          {"seed", cfg.seed},
          {"record_plan_ids", cfg.record_plan_ids}};
}

DescentConfig descent_from_json(const nlohmann::json& j) {
  DescentConfig cfg;
  cfg.step = j.at("alpha").get<double>();
  cfg.max_iters = j.at("max_iters").get<int>();
  cfg.grad_tol = j.at("grad_tol").get<double>();
  const nlohmann::json& bt = j.at("backtracking");
  cfg.backtracking.enabled = bt.at("enabled").get<bool>();
  cfg.backtracking.shrink = bt.at("shrink").get<double>();
  cfg.backtracking.sufficient_decrease =
      bt.at("sufficient_decrease").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.record_plan_ids = j.at("record_plan_ids").get<bool>();
  return cfg;
}

GaussianFitOptions gaussian_options_from_json(const nlohmann::json& config) {
  GaussianFitOptions opts;
  opts.descent = descent_from_json(config.at("descent"));
  opts.init = config.at("init").get<std::string>();
  return opts;
}

EmpiricalFitOptions empirical_options_from_json(const nlohmann::json& config) {
  EmpiricalFitOptions opts;
  opts.descent = descent_from_json(config.at("descent"));
  opts.basis = config.at("basis").get<std::string>();
  opts.exponents = config.at("exponents").get<std::vector<int>>();
  opts.theta_init = config.at("theta_init").get<std::vector<double>>();
  opts.dump_iters = config.at("dump_iters").get<std::vector<int>>();
  return opts;
}

BasisFamily make_family(const std::string& basis, Eigen::Index dim,
                        const std::vector<int>& exponents) {
  if (basis == "linear") return linear_family(dim);
  if (basis == "affine") return affine_family(dim);
  if (basis == "identity") return identity_family(dim);
  if (basis == "shifted-monomials-1d") {
    if (dim != 1) {
      throw std::invalid_argument("shifted-monomials-1d needs dimension 1");
    }
    return shifted_monomials_1d(exponents);
  }
  throw std::invalid_argument("unknown basis family: " + basis);
}

std::filesystem::path simulate_ar1_run(const Ar1Config& cfg,
                                       const std::filesystem::path& out_dir) {
  const std::vector<GaussianMeasure> snapshots = ar1_covariance_sequence(cfg);
  nlohmann::json doc = snapshots_to_json(snapshots);
  doc["config"] = {{"command", "simulate-ar1"},
                   {"a0", matrix_json(cfg.a0)},
                   {"noise_cov", matrix_json(cfg.noise_cov)},
                   {"c1", matrix_json(cfg.c1)},
                   {"steps", cfg.steps}};
  const std::filesystem::path path = out_dir / "snapshots.json";
  write_json_atomic(path, doc);
  return path;
}

RunArtifact fit_gaussian_run(const std::vector<GaussianMeasure>& snapshots,
                             const GaussianFitOptions& opts,
                             const std::filesystem::path& out_dir) {
  if (snapshots.size() < 2) {
    throw std::invalid_argument("need at least two snapshots");
  }
  for (const GaussianMeasure& g : snapshots) validate(g);
  const std::vector<Eigen::MatrixXd> covs = covariances(snapshots);
  const Eigen::Index d = covs.front().rows();

  Eigen::MatrixXd a_init;
  if (opts.init == "identity") {
    a_init = Eigen::MatrixXd::Identity(d, d);
  } else if (opts.init == "average") {
    a_init = average_monge_init(covs);
  } else {
    throw std::invalid_argument("unknown init: " + opts.init);
  }

  const auto start = Clock::now();
  const GaussianFit fit = fit_linear_gaussian(covs, opts.descent, a_init);
  const double wall_ms = wall_ms_since(start);

  const std::string trace = trace_csv(fit.trace, matrix_param_names(d));
  write_text_atomic(out_dir / "trace.csv", trace);

  nlohmann::json files = {{"trace", "trace.csv"}};
  if (d == 2) {
    write_text_atomic(out_dir / "ellipses.csv", ellipse_csv(snapshots, fit.a));
    files["ellipses"] = "ellipses.csv";
  }

  RunArtifact artifact;
  artifact.status = fit.trace.status;
  artifact.document = {
      {"command", "fit-gaussian"},
      {"config",
       {{"descent", descent_to_json(opts.descent)}, {"init", opts.init}}},
      {"snapshots", snapshots_to_json(snapshots).at("snapshots")},
      {"status", to_string(fit.trace.status)},
      {"message", fit.trace.message},
      {"final", terminal_json(fit.trace, vectorize_row_major(fit.a))},
      {"iterations",
       fit.trace.rows.empty() ? 0 : fit.trace.rows.back().iter},
      {"wall_ms", wall_ms},
      {"files", std::move(files)}};
  artifact.run_path = out_dir / "run.json";
  write_json_atomic(artifact.run_path, artifact.document);
  return artifact;
}

RunArtifact fit_empirical_run(const std::vector<EmpiricalMeasure>& snapshots,
                              const EmpiricalFitOptions& opts,
                              const std::filesystem::path& out_dir) {
  if (snapshots.size() < 2) {
    throw std::invalid_argument("need at least two snapshots");
  }
  for (const EmpiricalMeasure& e : snapshots) validate(e);
  const Eigen::Index d = snapshots.front().dim();
  const BasisFamily family = make_family(opts.basis, d, opts.exponents);

  Eigen::VectorXd theta0;
  if (opts.theta_init.empty()) {
    try {
      theta0 = identity_theta(family);
    } catch (const std::invalid_argument&) {
      theta0 = Eigen::VectorXd::Zero(family.n_params);
    }
  } else {
    if (static_cast<Eigen::Index>(opts.theta_init.size()) != family.n_params) {
      throw std::invalid_argument("theta-init length does not match family");
    }
    theta0 = Eigen::Map<const Eigen::VectorXd>(
        opts.theta_init.data(),
        static_cast<Eigen::Index>(opts.theta_init.size()));
  }

  const auto start = Clock::now();
  const EmpiricalFit fit =
      fit_basis_empirical(snapshots, family, opts.descent, theta0);
  const double wall_ms = wall_ms_since(start);

  write_text_atomic(out_dir / "trace.csv",
                    trace_csv(fit.trace, theta_param_names(family.n_params)));

  const int last_iter =
      fit.trace.rows.empty() ? -1 : fit.trace.rows.back().iter;
  const std::vector<int> dump_iters =
      resolve_dump_iters(opts.dump_iters, last_iter);

  nlohmann::json files = {{"trace", "trace.csv"}};
  if (d == 1 && !fit.trace.rows.empty()) {
    write_text_atomic(out_dir / "map_curves.csv",
                      map_curve_csv(fit.trace, family, dump_iters));
    write_text_atomic(
        out_dir / "densities.csv",
        density_csv(fit.trace, family, snapshots.front(), dump_iters));
    files["map_curves"] = "map_curves.csv";
    files["densities"] = "densities.csv";
  }

  std::vector<double> theta_resolved(theta0.data(), theta0.data() + theta0.size());
  RunArtifact artifact;
  artifact.status = fit.trace.status;
  artifact.document = {
      {"command", "fit-empirical"},
      {"config",
       {{"descent", descent_to_json(opts.descent)},
        {"basis", opts.basis},
        {"exponents", opts.exponents},
        {"theta_init", theta_resolved},
        {"dump_iters", dump_iters}}},
      {"snapshots", snapshots_to_json(snapshots).at("snapshots")},
      {"status", to_string(fit.trace.status)},
      {"message", fit.trace.message},
      {"final", terminal_json(fit.trace, fit.theta)},
      {"iterations", std::max(last_iter, 0)},
      {"wall_ms", wall_ms},
      {"files", std::move(files)}};
  artifact.run_path = out_dir / "run.json";
  write_json_atomic(artifact.run_path, artifact.document);
  return artifact;
}

OtRunResult ot_run(const std::filesystem::path& file_a,
                   const std::filesystem::path& file_b, int sample_n,
                   std::uint64_t seed, const std::filesystem::path& out_dir) {
  const SnapshotFile a = read_snapshot_file(file_a);
  const SnapshotFile b = read_snapshot_file(file_b);
  if (a.size() != 1 || b.size() != 1) {
    throw std::invalid_argument("ot expects exactly one measure per file");
  }

  OtRunResult result;
  if (a.is_gaussian() && b.is_gaussian() && sample_n == 0) {
    result.distance = w2_gaussian(a.gaussians.front(), b.gaussians.front());
    return result;
  }
  const auto as_empirical = [sample_n, seed](const SnapshotFile& f,
                                             std::uint64_t stream) {
    if (!f.is_gaussian()) return f.empiricals.front();
    if (sample_n < 1) {
      throw std::invalid_argument(
          "gaussian input needs --sampled <n> in empirical mode");
    }
    return sample_gaussian(f.gaussians.front(), sample_n,
                           derive_seed(seed, stream));
  };
  const EmpiricalMeasure ea = as_empirical(a, 0);
  const EmpiricalMeasure eb = as_empirical(b, 1);
  const Coupling coupling = solve_discrete_ot(ea, eb);
  result.distance = std::sqrt(std::max(coupling.cost, 0.0));
  result.coupling_path = out_dir / "coupling.csv";
  write_text_atomic(result.coupling_path, coupling_csv(coupling));
  return result;
}

RunArtifact ulam_run(const UlamRunConfig& cfg,
                     const std::filesystem::path& out_dir) {
  PointMap map;
  if (cfg.map == "cubic") {
    if (cfg.grid.dim() != 1) {
      throw std::invalid_argument("cubic map needs a 1-D grid");
    }
    map = cubic_benchmark_map();
  } else if (cfg.map == "identity") {
    map = [](const Eigen::VectorXd& x) { return x; };
  } else {
    throw std::invalid_argument("unknown map: " + cfg.map);
  }

  const auto start = Clock::now();
  const UlamMatrix ulam = ulam_matrix(map, cfg.grid, cfg.k, cfg.seed);
  const double wall_ms = wall_ms_since(start);

  write_text_atomic(out_dir / "ulam.csv", dense_matrix_csv(ulam.p));
  write_text_atomic(out_dir / "escape.csv", dense_matrix_csv(ulam.escape));

  nlohmann::json boxes = nlohmann::json::array();
  for (const Eigen::Index b : cfg.grid.boxes) boxes.push_back(b);
  RunArtifact artifact;
  artifact.status = FitStatus::kConverged;
  artifact.document = {
      {"command", "ulam"},
      {"config",
       {{"map", cfg.map},
        {"k", cfg.k},
        {"seed", cfg.seed},
        {"grid",
         {{"lo", vector_json(cfg.grid.lo)},
          {"hi", vector_json(cfg.grid.hi)},
          {"boxes", std::move(boxes)}}}}},
      {"wall_ms", wall_ms},
      {"files", {{"matrix", "ulam.csv"}, {"escape", "escape.csv"}}}};
  artifact.run_path = out_dir / "run.json";
  write_json_atomic(artifact.run_path, artifact.document);
  return artifact;
}

RunArtifact edmd_run(const EdmdRunConfig& cfg,
                     const std::filesystem::path& out_dir) {
  std::vector<Eigen::VectorXd> trajectory = cfg.trajectory;
  if (trajectory.empty()) {
    if (cfg.a0.rows() < 1 || cfg.a0.rows() != cfg.a0.cols() ||
        cfg.x1.size() != cfg.a0.rows() || cfg.steps < 2) {
      throw std::invalid_argument("invalid linear trajectory generator");
    }
    Eigen::VectorXd x = cfg.x1;
    trajectory.push_back(x);
    for (int t = 1; t < cfg.steps; ++t) {
      x = cfg.a0 * x;
      trajectory.push_back(x);
    }
  }
  const Eigen::Index d = trajectory.front().size();

  std::vector<Observable> dictionary;
  if (cfg.dictionary == "coordinates") {
    for (Eigen::Index i = 0; i < d; ++i) {
      dictionary.push_back(
          [i](const Eigen::VectorXd& x) { return x(i); });
    }
  } else if (cfg.dictionary == "constant") {
    dictionary.push_back([](const Eigen::VectorXd&) { return 1.0; });
  } else {
    throw std::invalid_argument("unknown dictionary: " + cfg.dictionary);
  }

  const auto start = Clock::now();
  const EdmdResult result = edmd_fit(trajectory, dictionary);
  const double wall_ms = wall_ms_since(start);

  write_text_atomic(out_dir / "edmd.csv", dense_matrix_csv(result.k));

  nlohmann::json points = nlohmann::json::array();
  for (const Eigen::VectorXd& x : trajectory) points.push_back(vector_json(x));
  RunArtifact artifact;
  artifact.status = FitStatus::kConverged;
  artifact.document = {{"command", "edmd"},
                       {"config",
                        {{"dictionary", cfg.dictionary},
                         {"trajectory", std::move(points)}}},
                       {"rank", result.rank},
                       {"rank_deficient", result.rank_deficient},
                       {"wall_ms", wall_ms},
                       {"files", {{"matrix", "edmd.csv"}}}};
  artifact.run_path = out_dir / "run.json";
  write_json_atomic(artifact.run_path, artifact.document);
  return artifact;
}

}  // namespace wassid
