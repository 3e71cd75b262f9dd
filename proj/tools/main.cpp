#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "wassid/errors.hpp"
#include "wassid/experiments.hpp"
#include "wassid/io.hpp"
#include "wassid/measures.hpp"

namespace {

using wassid::FitStatus;

Eigen::MatrixXd json_matrix(const nlohmann::json& rows) {
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n_cols = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (Eigen::Index c = 0; c < n_cols; ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                    .get<double>();
    }
  }
  return m;
}

Eigen::VectorXd json_vector(const nlohmann::json& values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = values[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

// Values from the config file fill in flags the user did not pass.
template <typename T>
void overlay(const CLI::Option* opt, const nlohmann::json& config,
             const char* key, T& value) {
  if (opt != nullptr && opt->count() > 0) return;
  if (config.contains(key)) value = config.at(key).get<T>();
}

struct CommonFlags {
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  double alpha = 0.1;
  int max_iters = 500;
  double grad_tol = 1e-6;
  bool backtracking = false;

  CLI::Option* o_seed = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_max_iters = nullptr;
  CLI::Option* o_grad_tol = nullptr;
  CLI::Option* o_backtracking = nullptr;

  void attach(CLI::App* cmd, bool with_descent) {
    cmd->add_option("--config", config_path, "JSON config file; flags win");
    o_out = cmd->add_option("--out", out, "output directory");
    o_seed = cmd->add_option("--seed", seed, "master seed");
    if (with_descent) {
      o_alpha = cmd->add_option("--alpha", alpha, "descent step size");
      o_max_iters = cmd->add_option("--max-iters", max_iters, "iteration cap");
      o_grad_tol = cmd->add_option("--grad-tol", grad_tol,
                                   "gradient-norm stopping tolerance");
      o_backtracking = cmd->add_flag("--backtracking", backtracking,
                                     "enable Armijo line search");
    }
  }

  nlohmann::json load_config() const {
    if (config_path.empty()) return nlohmann::json::object();
    return wassid::read_json_file(config_path);
  }

  void resolve(const nlohmann::json& config) {
    overlay(o_out, config, "out", out);
    overlay(o_seed, config, "seed", seed);
    overlay(o_alpha, config, "alpha", alpha);
    overlay(o_max_iters, config, "max_iters", max_iters);
    overlay(o_grad_tol, config, "grad_tol", grad_tol);
    overlay(o_backtracking, config, "backtracking", backtracking);
  }

  wassid::DescentConfig descent(const nlohmann::json& config) const {
    wassid::DescentConfig cfg;
    cfg.step = alpha;
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;
    cfg.backtracking.enabled = backtracking;
    if (config.contains("backtracking_shrink")) {
      cfg.backtracking.shrink = config.at("backtracking_shrink").get<double>();
    }
    if (config.contains("backtracking_decrease")) {
      cfg.backtracking.sufficient_decrease =
          config.at("backtracking_decrease").get<double>();
    }
    cfg.seed = seed;
    if (config.contains("record_plan_ids")) {
      cfg.record_plan_ids = config.at("record_plan_ids").get<bool>();
    }
    return cfg;
  }
};

int report_fit(const wassid::RunArtifact& artifact) {
  std::cout << "status=" << artifact.document.at("status").get<std::string>()
            << " iterations=" << artifact.document.at("iterations")
            << " wrote " << artifact.run_path.string() << "\n";
  if (artifact.status == FitStatus::kError) {
    std::cerr << "numerical error: "
              << artifact.document.at("message").get<std::string>() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein-regression identification of pushforward dynamics"};
  app.require_subcommand(1);

  CLI::App* sim = app.add_subcommand(
      "simulate-ar1", "generate gaussian snapshots from an AR(1) recursion");
  CommonFlags sim_flags;
  sim_flags.attach(sim, false);
  int sim_steps = 6;
  bool sim_noise_free = false;
  CLI::Option* o_sim_steps =
      sim->add_option("--steps", sim_steps, "snapshot count (>= 2)");
  sim->add_flag("--noise-free", sim_noise_free, "zero noise covariance");

  CLI::App* fitg = app.add_subcommand(
      "fit-gaussian", "fit a linear map to gaussian covariance snapshots");
  CommonFlags fitg_flags;
  fitg_flags.attach(fitg, true);
  std::string fitg_snapshots;
  std::string fitg_init = "identity";
  CLI::Option* o_fitg_snaps =
      fitg->add_option("--snapshots", fitg_snapshots, "snapshot JSON file");
  CLI::Option* o_fitg_init =
      fitg->add_option("--init", fitg_init, "identity | average");

  CLI::App* fite = app.add_subcommand(
      "fit-empirical", "fit a basis-parametrized map to point-cloud snapshots");
  CommonFlags fite_flags;
  fite_flags.attach(fite, true);
  std::string fite_snapshots;
  bool fite_cubic = false;
  int fite_grid_n = 100;
  std::string fite_basis = "shifted-monomials-1d";
  std::vector<int> fite_exponents = {3, 1, 0};
  std::vector<double> fite_theta;
  std::vector<int> fite_dump;
  CLI::Option* o_fite_snaps =
      fite->add_option("--snapshots", fite_snapshots, "snapshot JSON file");
  CLI::Option* o_fite_cubic = fite->add_flag(
      "--cubic", fite_cubic, "use the built-in cubic benchmark snapshots");
  CLI::Option* o_fite_grid =
      fite->add_option("--grid-n", fite_grid_n, "grid size for --cubic");
  CLI::Option* o_fite_basis = fite->add_option(
      "--basis", fite_basis, "linear | affine | shifted-monomials-1d | identity");
  CLI::Option* o_fite_exp = fite->add_option("--exponents", fite_exponents,
                                             "monomial exponents, e.g. 3,1,0")
                                ->delimiter(',');
  CLI::Option* o_fite_theta =
      fite->add_option("--theta-init", fite_theta, "initial parameters")
          ->delimiter(',');
  CLI::Option* o_fite_dump =
      fite->add_option("--dump-iters", fite_dump,
                       "iterations for map-curve and density dumps")
          ->delimiter(',');

  CLI::App* ot = app.add_subcommand(
      "ot", "optimal transport distance between two measure files");
  CommonFlags ot_flags;
  ot_flags.attach(ot, false);
  std::string ot_a, ot_b;
  int ot_sampled = 0;
  ot->add_option("file_a", ot_a, "first measure file")->required();
  ot->add_option("file_b", ot_b, "second measure file")->required();
  CLI::Option* o_ot_sampled = ot->add_option(
      "--sampled", ot_sampled, "sample gaussian inputs with n points");

  CLI::App* ulam = app.add_subcommand(
      "ulam", "box-discretized transfer-operator matrix of a point map");
  CommonFlags ulam_flags;
  ulam_flags.attach(ulam, false);
  std::string ulam_map = "cubic";
  std::vector<double> ulam_lo = {0.0};
  std::vector<double> ulam_hi = {1.0};
  std::vector<long long> ulam_boxes = {10};
  int ulam_k = 1000;
  CLI::Option* o_ulam_map =
      ulam->add_option("--map", ulam_map, "cubic | identity");
  CLI::Option* o_ulam_lo =
      ulam->add_option("--lo", ulam_lo, "per-axis lower bounds")->delimiter(',');
  CLI::Option* o_ulam_hi =
      ulam->add_option("--hi", ulam_hi, "per-axis upper bounds")->delimiter(',');
  CLI::Option* o_ulam_boxes =
      ulam->add_option("--boxes", ulam_boxes, "per-axis box counts")
          ->delimiter(',');
  CLI::Option* o_ulam_k =
      ulam->add_option("--k", ulam_k, "samples per box");

  CLI::App* edmd = app.add_subcommand(
      "edmd", "least-squares dictionary fit on a trajectory");
  CommonFlags edmd_flags;
  edmd_flags.attach(edmd, false);
  std::string edmd_traj;
  std::string edmd_dict = "coordinates";
  int edmd_steps = 10;
  CLI::Option* o_edmd_traj = edmd->add_option(
      "--traj", edmd_traj, "JSON file with a {\"points\": [[...]]} trajectory");
  CLI::Option* o_edmd_dict =
      edmd->add_option("--dict", edmd_dict, "coordinates | constant");
  CLI::Option* o_edmd_steps = edmd->add_option(
      "--steps", edmd_steps, "length of the built-in linear trajectory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) {
      const nlohmann::json config = sim_flags.load_config();
      sim_flags.resolve(config);
      overlay(o_sim_steps, config, "steps", sim_steps);
      wassid::Ar1Config cfg = wassid::default_ar1_config();
      if (config.contains("a0")) cfg.a0 = json_matrix(config.at("a0"));
      if (config.contains("noise_cov")) {
        cfg.noise_cov = json_matrix(config.at("noise_cov"));
      }
      if (config.contains("c1")) cfg.c1 = json_matrix(config.at("c1"));
      cfg.steps = sim_steps;
      if (sim_noise_free) {
        cfg.noise_cov = Eigen::MatrixXd::Zero(cfg.a0.rows(), cfg.a0.cols());
      }
      const std::filesystem::path path =
          wassid::simulate_ar1_run(cfg, sim_flags.out);
      std::cout << "wrote " << path.string() << "\n";
      return 0;
    }

    if (fitg->parsed()) {
      const nlohmann::json config = fitg_flags.load_config();
      fitg_flags.resolve(config);
      overlay(o_fitg_snaps, config, "snapshots", fitg_snapshots);
      overlay(o_fitg_init, config, "init", fitg_init);
      if (fitg_snapshots.empty()) {
        throw std::invalid_argument("fit-gaussian needs --snapshots <file>");
      }
      const wassid::SnapshotFile file =
          wassid::read_snapshot_file(fitg_snapshots);
      if (!file.is_gaussian()) {
        throw std::invalid_argument("fit-gaussian needs gaussian snapshots");
      }
      wassid::GaussianFitOptions opts;
      opts.descent = fitg_flags.descent(config);
      opts.init = fitg_init;
      return report_fit(
          wassid::fit_gaussian_run(file.gaussians, opts, fitg_flags.out));
    }

    if (fite->parsed()) {
      const nlohmann::json config = fite_flags.load_config();
      fite_flags.resolve(config);
      overlay(o_fite_snaps, config, "snapshots", fite_snapshots);
      overlay(o_fite_cubic, config, "cubic", fite_cubic);
      overlay(o_fite_grid, config, "grid_n", fite_grid_n);
      overlay(o_fite_basis, config, "basis", fite_basis);
      overlay(o_fite_exp, config, "exponents", fite_exponents);
      overlay(o_fite_theta, config, "theta_init", fite_theta);
      overlay(o_fite_dump, config, "dump_iters", fite_dump);

      std::vector<wassid::EmpiricalMeasure> snapshots;
      if (fite_cubic) {
        snapshots = wassid::cubic_snapshots(fite_grid_n);
      } else {
        if (fite_snapshots.empty()) {
          throw std::invalid_argument(
              "fit-empirical needs --snapshots <file> or --cubic");
        }
        const wassid::SnapshotFile file =
            wassid::read_snapshot_file(fite_snapshots);
        if (file.is_gaussian()) {
          throw std::invalid_argument(
              "fit-empirical needs empirical snapshots");
        }
        snapshots = file.empiricals;
      }
      wassid::EmpiricalFitOptions opts;
      opts.descent = fite_flags.descent(config);
      opts.basis = fite_basis;
      opts.exponents = fite_exponents;
      opts.theta_init = fite_theta;
      opts.dump_iters = fite_dump;
      return report_fit(
          wassid::fit_empirical_run(snapshots, opts, fite_flags.out));
    }

    if (ot->parsed()) {
      const nlohmann::json config = ot_flags.load_config();
      ot_flags.resolve(config);
      overlay(o_ot_sampled, config, "sampled", ot_sampled);
      const wassid::OtRunResult result =
          wassid::ot_run(ot_a, ot_b, ot_sampled, ot_flags.seed, ot_flags.out);
      std::cout << wassid::format_sig(result.distance, 12) << "\n";
      if (!result.coupling_path.empty()) {
        std::cerr << "wrote " << result.coupling_path.string() << "\n";
      }
      return 0;
    }

    if (ulam->parsed()) {
      const nlohmann::json config = ulam_flags.load_config();
      ulam_flags.resolve(config);
      overlay(o_ulam_map, config, "map", ulam_map);
      overlay(o_ulam_lo, config, "lo", ulam_lo);
      overlay(o_ulam_hi, config, "hi", ulam_hi);
      overlay(o_ulam_boxes, config, "boxes", ulam_boxes);
      overlay(o_ulam_k, config, "k", ulam_k);
      wassid::UlamRunConfig cfg;
      cfg.map = ulam_map;
      cfg.grid.lo = Eigen::Map<const Eigen::VectorXd>(
          ulam_lo.data(), static_cast<Eigen::Index>(ulam_lo.size()));
      cfg.grid.hi = Eigen::Map<const Eigen::VectorXd>(
          ulam_hi.data(), static_cast<Eigen::Index>(ulam_hi.size()));
      cfg.grid.boxes.assign(ulam_boxes.begin(), ulam_boxes.end());
      cfg.k = ulam_k;
      cfg.seed = ulam_flags.seed;
      const wassid::RunArtifact artifact = wassid::ulam_run(cfg, ulam_flags.out);
      std::cout << "wrote " << artifact.run_path.string() << "\n";
      return 0;
    }

    if (edmd->parsed()) {
      const nlohmann::json config = edmd_flags.load_config();
      edmd_flags.resolve(config);
      overlay(o_edmd_traj, config, "traj", edmd_traj);
      overlay(o_edmd_dict, config, "dictionary", edmd_dict);
      overlay(o_edmd_steps, config, "steps", edmd_steps);
      wassid::EdmdRunConfig cfg;
      cfg.dictionary = edmd_dict;
      cfg.steps = edmd_steps;
      if (!edmd_traj.empty()) {
        const nlohmann::json doc = wassid::read_json_file(edmd_traj);
        const Eigen::MatrixXd points = json_matrix(doc.at("points"));
        for (Eigen::Index r = 0; r < points.rows(); ++r) {
          cfg.trajectory.push_back(points.row(r).transpose());
        }
      } else {
        cfg.a0 = config.contains("a0") ? json_matrix(config.at("a0"))
                                       : wassid::default_ar1_config().a0;
        cfg.x1 = config.contains("x1")
                     ? json_vector(config.at("x1"))
                     : Eigen::VectorXd(Eigen::Vector2d(1.0, 1.0));
      }
      const wassid::RunArtifact artifact = wassid::edmd_run(cfg, edmd_flags.out);
      std::cout << "wrote " << artifact.run_path.string() << "\n";
      return 0;
    }
  } catch (const wassid::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
