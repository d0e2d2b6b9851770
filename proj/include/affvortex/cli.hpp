#pragma once

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "affvortex/io.hpp"
#include "affvortex/kw_solver.hpp"
#include "affvortex/moduli.hpp"
#include "affvortex/qkirwan.hpp"
#include "affvortex/radial_oracle.hpp"
#include "affvortex/vortex.hpp"

namespace affvortex::cli {

using io::json;
namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitConsistency = 4;

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::ParseError:
    case ErrorCode::EmptyW:
    case ErrorCode::MixedN:
      return kExitInput;
    case ErrorCode::RootFindingFailed:
    case ErrorCode::NewtonStalled:
    case ErrorCode::LinearSolveFailed:
    case ErrorCode::BoundaryInvalid:
    case ErrorCode::OracleDiverged:
    case ErrorCode::InconclusiveTrend:
      return kExitSolver;
    case ErrorCode::DerivativeMismatch:
    case ErrorCode::EvInfMismatch:
      return kExitConsistency;
  }
  return kExitConsistency;
}

/// Settings merged from the config file and command-line flags (flags win).
struct RunConfig {
  std::optional<double> radius;
  int n_r = GridDefaults::n_r;
  int n_theta = GridDefaults::n_theta;
  double gamma = GridDefaults::gamma;
  SolverConfig solver;
  InitialGuess guess = InitialGuess::LogWeightPlusOne;
  double oracle_radius = 8.0;
  int oracle_nodes = 513;
  double sweep_radius = 8.0;
  double neighbourhood = 0.5;

  /// Fails before any work if the grid or solver settings are invalid.
  void validate() const {
    if (radius) PolarGrid(*radius, n_r, n_theta, gamma);
    PolarGrid(1.0, n_r, n_theta, gamma);
    solver.validate();
    require(oracle_radius > 0.0 && std::isfinite(oracle_radius), ErrorCode::InvalidInput, "oracle radius must be positive");
    require(oracle_nodes >= 3, ErrorCode::InvalidInput, "oracle nodes must be at least 3");
    PolarGrid(sweep_radius, n_r, n_theta, gamma);
    require(neighbourhood > 0.0 && std::isfinite(neighbourhood), ErrorCode::InvalidInput,
            "sweep neighbourhood_radius must be positive");
  }

  PolarGrid grid_for(const NPair& pair) const {
    return PolarGrid(radius ? *radius : GridDefaults::radius_factor * (1.0 + pair.max_root_radius()), n_r, n_theta, gamma);
  }
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  require(j.is_object(), ErrorCode::ParseError, "config field '" + path + "' must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items())
    require(allowed.count(key) > 0, ErrorCode::ParseError, "unknown config field '" + io::join(path, key) + "'");
}

inline InitialGuess parse_guess(const std::string& s) {
  if (s == "log_weight_plus_one") return InitialGuess::LogWeightPlusOne;
  if (s == "boundary_extension") return InitialGuess::BoundaryExtension;
  fail(ErrorCode::ParseError, "initial_guess must be 'log_weight_plus_one' or 'boundary_extension', got '" + s + "'");
}

inline void apply_config_file(RunConfig& cfg, const json& j) {
  reject_unknown(j, "", {"grid", "solver", "oracle", "sweep"});
  if (j.contains("grid")) {
    const json& g = j["grid"];
    reject_unknown(g, "grid", {"radius", "n_r", "n_theta", "gamma"});
    if (g.contains("radius")) cfg.radius = io::get_real(g["radius"], "grid.radius");
    if (g.contains("n_r")) cfg.n_r = io::get_int(g["n_r"], "grid.n_r");
    if (g.contains("n_theta")) cfg.n_theta = io::get_int(g["n_theta"], "grid.n_theta");
    if (g.contains("gamma")) cfg.gamma = io::get_real(g["gamma"], "grid.gamma");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, "solver", {"tol_residual", "max_newton", "min_step", "linear_tol", "max_cg", "initial_guess"});
    if (s.contains("tol_residual")) cfg.solver.tol_residual = io::get_real(s["tol_residual"], "solver.tol_residual");
    if (s.contains("max_newton")) cfg.solver.max_newton = io::get_int(s["max_newton"], "solver.max_newton");
    if (s.contains("min_step")) cfg.solver.min_step = io::get_real(s["min_step"], "solver.min_step");
    if (s.contains("linear_tol")) cfg.solver.linear_tol = io::get_real(s["linear_tol"], "solver.linear_tol");
    if (s.contains("max_cg")) cfg.solver.max_cg = io::get_int(s["max_cg"], "solver.max_cg");
    if (s.contains("initial_guess")) {
      require(s["initial_guess"].is_string(), ErrorCode::ParseError, "field 'solver.initial_guess' must be a string");
      cfg.guess = parse_guess(s["initial_guess"].get<std::string>());
    }
  }
  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    reject_unknown(o, "oracle", {"radius", "nodes"});
    if (o.contains("radius")) cfg.oracle_radius = io::get_real(o["radius"], "oracle.radius");
    if (o.contains("nodes")) cfg.oracle_nodes = io::get_int(o["nodes"], "oracle.nodes");
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    reject_unknown(s, "sweep", {"radius", "neighbourhood_radius"});
    if (s.contains("radius")) cfg.sweep_radius = io::get_real(s["radius"], "sweep.radius");
    if (s.contains("neighbourhood_radius")) cfg.neighbourhood = io::get_real(s["neighbourhood_radius"], "sweep.neighbourhood_radius");
  }
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct SampleResult {
  bool ok = false;
  json report;
  std::optional<ScalarField> h;
};

}  // namespace detail

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    started_ = std::chrono::steady_clock::now();
    for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);

    CLI::App app{"Affine vortices: Kazdan-Warner solver, moduli classifiers and quantum Kirwan map", "affvortex"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", config_path_, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir_, "output directory (created if missing)");
    app.add_option("--jobs", jobs_, "parallel sweep samples")->check(CLI::PositiveNumber);
    app.add_option("--radius", flag_radius_, "disk radius R");
    app.add_option("--n-r", flag_n_r_, "number of rings");
    app.add_option("--n-theta", flag_n_theta_, "nodes per ring (even)");
    app.add_option("--gamma", flag_gamma_, "ring grading exponent");
    app.add_option("--tol", flag_tol_, "residual tolerance");
    app.add_option("--max-newton", flag_max_newton_, "Newton step limit");
    app.add_option("--initial-guess", flag_guess_, "log_weight_plus_one | boundary_extension");
    app.add_option("--nodes", flag_nodes_, "oracle profile nodes");

    auto* solve = app.add_subcommand("solve", "solve the Kazdan-Warner equation for an N-pair");
    solve->add_option("pair", input_, "NPair JSON file")->required();
    auto* oracle = app.add_subcommand("oracle", "radial profile for psi = z^d");
    oracle->add_option("d", degree_, "degree")->required();
    auto* classify = app.add_subcommand("classify", "Uhlenbeck stratum, degree-one limit or bubbling verdict");
    classify->add_option("input", input_, "coords, d1-limit or bubble JSON file")->required();
    auto* kirwan = app.add_subcommand("kirwan", "evaluate the quantum Kirwan map");
    kirwan->add_option("expression", expression_, "polynomial in u and q")->required();
    kirwan->add_option("-N,--components", components_, "N of P^{N-1}")->required();
    auto* sweep = app.add_subcommand("sweep", "solve a rescaled family and apply the bubbling criterion");
    sweep->add_option("family", input_, "family JSON file")->required();

    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      return report_error("ParseError", e.what(), kExitInput);
    }

    try {
      if (!config_path_.empty()) detail::apply_config_file(cfg_, io::read_json_file(config_path_));
      apply_flags();
      cfg_.validate();
      if (!out_dir_.empty()) fs::create_directories(out_dir_);
      if (*solve) return cmd_solve();
      if (*oracle) return cmd_oracle();
      if (*classify) return cmd_classify();
      if (*kirwan) return cmd_kirwan();
      return cmd_sweep();
    } catch (const Error& e) {
      return report_error(std::string(to_string(e.code())), e.what(), exit_code_for(e.code()));
    } catch (const std::exception& e) {
      return report_error("Internal", e.what(), kExitConsistency);
    }
  }

 private:
  void apply_flags() {
    if (flag_radius_) cfg_.radius = *flag_radius_, cfg_.oracle_radius = *flag_radius_, cfg_.sweep_radius = *flag_radius_;
    if (flag_n_r_) cfg_.n_r = *flag_n_r_;
    if (flag_n_theta_) cfg_.n_theta = *flag_n_theta_;
    if (flag_gamma_) cfg_.gamma = *flag_gamma_;
    if (flag_tol_) cfg_.solver.tol_residual = *flag_tol_;
    if (flag_max_newton_) cfg_.solver.max_newton = *flag_max_newton_;
    if (flag_guess_) cfg_.guess = detail::parse_guess(*flag_guess_);
    if (flag_nodes_) cfg_.oracle_nodes = *flag_nodes_;
  }

  fs::path out_path(const std::string& name) const { return (out_dir_.empty() ? fs::path(".") : fs::path(out_dir_)) / name; }

  void write(const std::string& name, const std::string& content) {
    io::write_atomic(out_path(name), content);
    artifacts_.push_back(name);
  }

  void write_meta(const std::string& command, json extra = json::object()) {
    json meta = {{"command", command},
                 {"argv", argv_},
                 {"started_utc", detail::utc_now()},
                 {"elapsed_seconds",
                  std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count()},
                 {"jobs", jobs_},
                 {"artifacts", artifacts_}};
    meta.update(extra);
    io::write_atomic(out_path("run_meta.json"), io::dump(meta));
  }

  int report_error(const std::string& code, const std::string& message, int exit_code) {
    const std::string text = io::dump(io::error_json(code, message, exit_code));
    err_ << text;
    if (!out_dir_.empty()) {
      try {
        fs::create_directories(out_dir_);
        io::write_atomic(out_path("error.json"), text);
      } catch (const std::exception&) {
      }
    }
    return exit_code;
  }

  int cmd_solve() {
    const NPair pair = io::pair_from_json(io::read_json_file(input_));
    auto grid = std::make_shared<PolarGrid>(cfg_.grid_for(pair));
    const SolveReport rep = solve_kw_detailed(pair, grid, cfg_.solver, std::nullopt, cfg_.guess);
    const VortexSolution sol(pair, rep.h);
    const Observables obs = observables(sol);
    write("h.csv", io::field_csv(rep.h));
    write("observables.json", io::dump(io::to_json(obs)));
    write_meta("solve", {{"newton_iterations", rep.newton_iterations},
                         {"cg_iterations", rep.cg_iterations},
                         {"final_residual", rep.residual_history.empty() ? 0.0 : static_cast<double>(rep.residual_history.back())},
                         {"grid", {{"radius", grid->radius()}, {"n_r", grid->n_r()}, {"n_theta", grid->n_theta()}}}});
    return kExitOk;
  }

  int cmd_oracle() {
    require(degree_ >= 0 && degree_ <= kMaxDegree, ErrorCode::InvalidInput, "oracle degree must lie in [0, 30]");
    const RadialProfile prof = radial_oracle(degree_, cfg_.oracle_radius, cfg_.oracle_nodes);
    write("profile.csv", io::profile_csv(prof));
    write_meta("oracle", {{"h0", prof.h0}});
    return kExitOk;
  }

  int cmd_classify() {
    const json j = io::read_json_file(input_);
    require(j.is_object(), ErrorCode::ParseError, "classify input must be a JSON object");
    json result;
    if (j.contains("coords"))
      result = io::to_json(classify_stratum(io::moduli_point_from_json(j)));
    else if (j.contains("a"))
      result = io::to_json(classify_limit_d1(io::d1_input_from_json(j)));
    else if (j.contains("samples"))
      result = io::to_json(bubble_criterion(io::bubble_from_json(j)));
    else
      fail(ErrorCode::ParseError, "classify input needs one of the fields 'coords', 'a' or 'samples'");
    write("classification.json", io::dump(result));
    write_meta("classify");
    return kExitOk;
  }

  int cmd_kirwan() {
    const QHElement image = kirwan_q_lambda(EquivariantElement::parse(expression_), components_);
    out_ << image.str() << "\n";
    if (!out_dir_.empty()) {
      write("kirwan.json", io::dump({{"expression", expression_}, {"n", components_}, {"result", image.str()}}));
      write_meta("kirwan");
    }
    return kExitOk;
  }

  int cmd_sweep() {
    const json j = io::read_json_file(input_);
    detail::reject_unknown(j, "", {"samples", "neighbourhood_radius"});
    if (j.contains("neighbourhood_radius")) {
      cfg_.neighbourhood = io::get_real(j["neighbourhood_radius"], "neighbourhood_radius");
      cfg_.validate();
    }
    const json& list = io::get_array(io::field(j, "samples", ""), "samples");
    require(!list.empty(), ErrorCode::ParseError, "field 'samples' must not be empty");
    std::vector<NPair> pairs;
    std::vector<double> lambdas;
    std::vector<cplx> centres;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = io::join("samples", k);
      pairs.push_back(io::pair_from_json(io::field(list[k], "pair", p), io::join(p, "pair")));
      lambdas.push_back(io::get_real(io::field(list[k], "lambda", p), io::join(p, "lambda")));
      centres.push_back(io::get_cplx(io::field(list[k], "z", p), io::join(p, "z")));
      require(lambdas.back() > 0.0 && std::isfinite(lambdas.back()), ErrorCode::ParseError,
              "field '" + io::join(p, "lambda") + "' must be positive");
    }

    // Every member is rescaled to w = lambda (z - z_k), normalised to unit
    // coefficient norm and solved on one shared grid.
    auto grid = std::make_shared<const PolarGrid>(cfg_.sweep_radius, cfg_.n_r, cfg_.n_theta, cfg_.gamma);
    std::vector<detail::SampleResult> results(pairs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
      for (std::size_t k = next++; k < pairs.size(); k = next++) results[k] = solve_sample(pairs[k], lambdas[k], centres[k], grid);
    };
    std::vector<std::thread> threads;
    const int jobs = std::max(1, std::min<int>(jobs_, static_cast<int>(pairs.size())));
    for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();

    json samples = json::array();
    json diffs = json::array();
    int succeeded = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      json s = results[k].report;
      s["index"] = k;
      s["lambda"] = lambdas[k];
      s["z"] = io::to_json(centres[k]);
      samples.push_back(s);
      succeeded += results[k].ok;
      if (k > 0) {
        if (results[k].h && results[k - 1].h)
          diffs.push_back(static_cast<double>((*results[k].h - *results[k - 1].h).sup_norm()));
        else
          diffs.push_back(nullptr);
      }
    }

    json bubble;
    try {
      bubble = io::to_json(bubble_criterion(bubble_sequence_from_pairs(pairs, lambdas, centres, cfg_.neighbourhood)));
    } catch (const Error& e) {
      bubble = io::error_json(std::string(to_string(e.code())), e.what(), exit_code_for(e.code()))["error"];
      bubble = {{"error", bubble}};
    }
    const json summary = {{"samples", samples},
                          {"succeeded", succeeded},
                          {"h_differences", diffs},
                          {"bubble", bubble},
                          {"verdict", bubble.contains("verdict") ? bubble["verdict"] : json(nullptr)},
                          {"grid", {{"radius", grid->radius()}, {"n_r", grid->n_r()}, {"n_theta", grid->n_theta()}, {"gamma", cfg_.gamma}}}};
    if (succeeded == 0) return report_error("SweepFailed", "no sample of the family could be solved", kExitSolver);
    for (std::size_t k = 0; k < samples.size(); ++k) write("sample_" + std::to_string(k) + ".json", io::dump(samples[k]));
    write("summary.json", io::dump(summary));
    write_meta("sweep");
    return kExitOk;
  }

  detail::SampleResult solve_sample(const NPair& pair, double lambda, cplx z, const std::shared_ptr<const PolarGrid>& grid) const {
    detail::SampleResult r;
    try {
      const NPair zoomed = pair.rescaled(z, lambda);
      double norm2 = 0.0;
      for (const auto& p : zoomed.polys())
        for (cplx c : p.coeffs()) norm2 += std::norm(c);
      const NPair unit = zoomed.scaled(1.0 / std::sqrt(norm2));
      const VortexSolution sol(unit, solve_kw(unit, grid, cfg_.solver, cfg_.guess));
      const Observables obs = observables(sol);
      r.report = {{"status", "ok"}, {"energy", obs.energy}, {"observables", io::to_json(obs)}, {"error", nullptr}};
      r.h = sol.h();
      r.ok = true;
    } catch (const Error& e) {
      r.report = {{"status", "failed"},
                  {"energy", nullptr},
                  {"observables", nullptr},
                  {"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}};
    }
    return r;
  }

  std::ostream& out_;
  std::ostream& err_;
  std::chrono::steady_clock::time_point started_;
  std::vector<std::string> argv_;
  std::vector<std::string> artifacts_;

  RunConfig cfg_;
  std::string config_path_;
  std::string out_dir_;
  int jobs_ = 1;
  std::optional<double> flag_radius_;
  std::optional<int> flag_n_r_;
  std::optional<int> flag_n_theta_;
  std::optional<double> flag_gamma_;
  std::optional<double> flag_tol_;
  std::optional<int> flag_max_newton_;
  std::optional<std::string> flag_guess_;
  std::optional<int> flag_nodes_;

  std::string input_;
  int degree_ = 0;
  std::string expression_;
  int components_ = 0;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

}  // namespace affvortex::cli
