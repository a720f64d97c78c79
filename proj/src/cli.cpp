#include "homog/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "homog/checks.hpp"
#include "homog/config.hpp"
#include "homog/errors.hpp"
#include "homog/oracles.hpp"
#include "homog/parallel.hpp"

namespace homog {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputational = 1;
constexpr int kExitUsage = 2;

void print_tensor2(const char* label, const Tensor2& t) {
  std::printf("%s [[%.10g, %.10g], [%.10g, %.10g]]\n", label, t.v[0][0],
              t.v[0][1], t.v[1][0], t.v[1][1]);
}

void print_tensor4(const char* label, const Tensor4& c) {
  std::printf("%s (rows ij, cols kl; order 11,12,21,22)\n", label);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      std::printf("  ");
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) std::printf("%14.6g", c.v[i][j][k][l]);
      std::printf("\n");
    }
}

FlatVec4 parse_fbar(const std::string& spec) {
  FlatVec4 f;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &f[0], &f[1], &f[2],
                  &f[3]) != 4)
    throw CLI::ValidationError("--Fbar", "expected f11,f12,f21,f22");
  return f;
}

int report(const CheckReport& rep) {
  for (const auto& line : rep.lines)
    std::printf("[%s] %s: %.3g (threshold %.3g)\n",
                line.pass ? "PASS" : "FAIL", line.name.c_str(), line.value,
                line.threshold);
  return rep.pass() ? kExitOk : kExitComputational;
}

const RveProblem& need_rve(const ProblemConfig& cfg) {
  if (!cfg.rve)
    throw ParseError("config: this command needs an 'rve' section");
  return *cfg.rve;
}

int cmd_sample(const std::string& config_path, std::optional<int> count,
               std::optional<std::uint64_t> seed, const std::string& out,
               bool paper_scale, int threads) {
  const ProblemConfig cfg = parse_problem_config(config_path);
  const RveProblem& problem = need_rve(cfg);
  if (!cfg.sampling_box)
    throw ParseError("config: sampling section required for 'sample'");
  int n = count.value_or(cfg.sample_count > 0 ? cfg.sample_count : 2000);
  if (paper_scale && !count) n = 200000;
  if (n < 1) throw CLI::ValidationError("--count", "must be >= 1");
  const std::uint64_t s = seed.value_or(cfg.seed);

  int last_percent = -1;
  auto progress = [&](int done, int total) {
    const int pct = static_cast<int>(100.0 * done / total);
    if (pct > last_percent) {
      last_percent = pct;
      std::fprintf(stderr, "\rsampling %3d%% (%d/%d)", pct, done, total);
      if (done == total) std::fprintf(stderr, "\n");
    }
  };

  BuildResult result =
      build_dataset(problem, *cfg.sampling_box, n, s, cfg.solver, threads,
                    progress);
  result.dataset.rve_descriptor = cfg.rve_descriptor;
  save_dataset(result.dataset, out);
  std::printf("wrote %zu records to %s (%zu rejected)\n",
              result.dataset.records.size(), out.c_str(),
              result.rejects.size());
  if (!result.rejects.empty()) {
    save_reject_log(result.rejects, out + ".rejects.csv");
    std::printf("reject log: %s.rejects.csv\n", out.c_str());
  }
  return kExitOk;
}

int cmd_train(const std::string& data_path, const std::string& arch_spec,
              std::uint64_t seed, const std::string& out, bool paper_scale,
              const TrainOptions& base_opts) {
  const Dataset data = load_dataset(data_path);
  HdmrArch arch{5, data.input_dim, 10};
  if (!arch_spec.empty()) {
    if (std::sscanf(arch_spec.c_str(), "%d,%d,%d", &arch.L, &arch.d,
                    &arch.N) != 3)
      throw CLI::ValidationError("--arch", "expected L,d,N");
  } else if (paper_scale) {
    arch = data.input_dim == 1 ? HdmrArch{2, 1, 5} : HdmrArch{15, 4, 20};
  } else if (data.input_dim == 1) {
    arch = HdmrArch{2, 1, 5};
  }
  if (arch.d > data.input_dim)
    throw CLI::ValidationError("--arch",
                               "reduced dimension d exceeds input dimension");
  TrainOptions opts = base_opts;
  opts.seed = seed;
  const TrainResult result = train(data, arch, opts);
  save_model(result.model, out);
  std::printf("arch L=%d d=%d N=%d records=%zu\n", arch.L, arch.d, arch.N,
              data.records.size());
  std::printf("train RMSE %.6e, validation RMSE %.6e (normalized units)\n",
              result.train_rmse, result.val_rmse);
  std::printf("model written to %s\n", out.c_str());
  return kExitOk;
}

int cmd_micro(const std::string& config_path, const std::string& fbar_spec,
              const std::string& export_path, bool verify) {
  const ProblemConfig cfg = parse_problem_config(config_path);
  const RveProblem& problem = need_rve(cfg);
  const Tensor2 Fbar = unflatten(parse_fbar(fbar_spec));

  SpectralSolver solver(problem, cfg.solver);
  const MicroSolution sol = solver.solve(Fbar);
  const Tensor4 Cbar = solver.macro_tangent(sol);

  std::printf("micro solve: %d Newton iterations, residual %.3e\n",
              sol.iterations, sol.residual_norm);
  std::printf("psi_bar = %.12g\n", sol.psi_bar);
  print_tensor2("P_bar =", sol.Pbar);
  print_tensor4("C_bar =", Cbar);

  if (verify) {
    if (problem.materials.size() < 2)
      throw ParseError("--verify needs a two-phase laminate RVE");
    const LaminateProblem oracle(problem.materials[0], problem.materials[1],
                                 problem.phases.volume_fraction(0));
    const auto [psi_ref, P_ref] = laminate_energy_stress(oracle, Fbar);
    std::printf("laminate oracle: psi_bar = %.12g\n", psi_ref);
    print_tensor2("laminate oracle: P_bar =", P_ref);
    const double err_psi = std::abs(sol.psi_bar - psi_ref) /
                           std::max(std::abs(psi_ref), 1e-300);
    Tensor2 dP = sol.Pbar - P_ref;
    const double err_P = norm2(dP) / std::max(norm2(P_ref), 1e-300);
    std::printf("relative errors: psi %.3e, P %.3e\n", err_psi, err_P);
    if (!(err_psi <= 1e-4 && err_P <= 1e-4)) {
      std::printf("VERIFY FAIL\n");
      return kExitComputational;
    }
    std::printf("VERIFY PASS\n");
  }
  if (!export_path.empty()) {
    export_micro_fields(problem, sol, export_path);
    std::printf("fields written to %s\n", export_path.c_str());
  }
  return kExitOk;
}

int cmd_macro(const std::string& config_path, std::string provider_name,
              const std::string& out, int threads) {
  const ProblemConfig cfg = parse_problem_config(config_path);
  if (!cfg.macro)
    throw ParseError("config: macro section required for 'macro'");
  const MacroConfig& mc = *cfg.macro;
  if (provider_name.empty()) provider_name = mc.provider;

  auto [mesh, bc] = mc.mesh.realize();
  std::unique_ptr<ConstitutiveProvider> provider;
  if (provider_name == "surrogate") {
    if (mc.model_file.empty())
      throw ParseError("config: macro.model_file required for the surrogate "
                       "provider");
    HdmrModel model = load_model(mc.model_file);
    provider = std::make_unique<SurrogateProvider>(
        std::move(model), [](const ExtrapolationWarning& w) {
          std::fprintf(stderr,
                       "warning: quadrature point %zu left the training box "
                       "by %.1f%% of its width\n",
                       w.qp, 100.0 * w.excess);
        });
  } else if (provider_name == "nested") {
    provider = std::make_unique<NestedProvider>(need_rve(cfg), cfg.solver);
  } else if (provider_name == "direct") {
    provider = std::make_unique<DirectProvider>(need_rve(cfg).materials);
  } else {
    throw CLI::ValidationError("--provider", "surrogate|nested|direct");
  }

  FemOptions fem = mc.fem;
  fem.threads = threads;
  const MacroSolution sol = solve_macro(mesh, bc, *provider, fem);

  // Summary displacement: mean over the traction-loaded nodes.
  double uy = 0.0, ux = 0.0;
  int count = 0;
  std::vector<char> seen(mesh.n_nodes(), 0);
  for (const auto& tr : bc.tractions)
    for (int node : {tr.n1, tr.n2})
      if (!seen[node]) {
        seen[node] = 1;
        ux += sol.displacement[2 * node + 0];
        uy += sol.displacement[2 * node + 1];
        ++count;
      }
  if (count > 0)
    std::printf("loaded-edge mean displacement: ux = %.8g, uy = %.8g\n",
                ux / count, uy / count);
  std::printf("total Newton iterations: %d, final residual %.3e\n",
              sol.newton_iterations, sol.residual_norm);
  if (auto* nested = dynamic_cast<NestedProvider*>(provider.get()))
    std::printf("micro solves: %ld\n", nested->micro_solve_count());
  if (auto* surro = dynamic_cast<SurrogateProvider*>(provider.get()))
    if (surro->warning_count() > 0)
      std::printf("extrapolation warnings: %ld\n", surro->warning_count());
  if (!out.empty()) {
    export_solution(mesh, sol, out);
    std::printf("solution written to %s\n", out.c_str());
  }
  return kExitOk;
}

int cmd_validate(const std::string& suite, int threads) {
  if (suite == "projection")
    return report(check_projection(31, 31, 20, 20482048));
  if (suite == "laminate") {
    SolverOptions opts;
    return report(check_laminate(20, 777, 31, opts, threads));
  }
  if (suite == "toy1d") return report(check_toy1d());
  if (suite == "derivatives")
    return report(check_surrogate_derivatives(100, 4242));
  throw CLI::ValidationError(
      "suite", "expected projection|laminate|toy1d|derivatives");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Two-scale homogenization toolkit: FFT micro solver, "
               "HDMR energy surrogate, plane-strain macro FEM"};
  app.require_subcommand(1);
  int threads = default_thread_count();
  app.add_option("--threads", threads, "worker pool size");

  std::string config_path, out, arch_spec, fbar_spec, export_path, data_path,
      provider_name, suite;
  std::optional<int> count;
  std::optional<std::uint64_t> seed_opt;
  std::uint64_t train_seed = 0;
  bool paper_scale = false, verify = false;
  TrainOptions train_opts;

  auto* sample = app.add_subcommand("sample", "offline stage: sample the box "
                                              "and solve micro problems");
  sample->add_option("config", config_path, "problem config file")->required();
  sample->add_option("--count", count, "number of samples");
  sample->add_option("--seed", seed_opt, "sampling seed");
  sample->add_option("--out", out, "dataset output path")->required();
  sample->add_flag("--paper-scale", paper_scale,
                   "database size from the reference tables");

  auto* tr = app.add_subcommand("train", "fit the HDMR energy surrogate");
  tr->add_option("--data", data_path, "dataset file")->required();
  tr->add_option("--arch", arch_spec, "architecture L,d,N");
  tr->add_option("--seed", train_seed, "training seed");
  tr->add_option("--out", out, "model output path")->required();
  tr->add_flag("--paper-scale", paper_scale,
               "architecture from the reference tables");
  tr->add_option("--epochs", train_opts.finetune_epochs,
                 "fine-tune epoch count");
  tr->add_option("--lm-iter", train_opts.lm_max_iter,
                 "Levenberg-Marquardt iteration cap per component");
  tr->add_option("--restarts", train_opts.lm_restarts,
                 "seeded restarts per component");
  tr->add_option("--val-fraction", train_opts.val_fraction,
                 "validation holdout fraction");

  auto* micro = app.add_subcommand("micro", "solve one micro problem");
  micro->add_option("config", config_path, "problem config file")->required();
  micro->add_option("--Fbar", fbar_spec, "macroscopic F as f11,f12,f21,f22")
      ->required();
  micro->add_option("--export", export_path, "per-voxel field CSV path");
  micro->add_flag("--verify", verify,
                  "compare against the laminate analytical system");

  auto* macro = app.add_subcommand("macro", "online stage: macro FEM solve");
  macro->add_option("config", config_path, "problem config file")->required();
  macro->add_option("--provider", provider_name,
                    "surrogate|nested|direct (default from config)");
  macro->add_option("--out", out, "solution CSV path");

  auto* validate = app.add_subcommand("validate", "oracle/property suites");
  validate->add_option("suite", suite,
                       "projection|laminate|toy1d|derivatives")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sample->parsed())
      return cmd_sample(config_path, count, seed_opt, out, paper_scale,
                        threads);
    if (tr->parsed())
      return cmd_train(data_path, arch_spec, train_seed, out, paper_scale,
                       train_opts);
    if (micro->parsed())
      return cmd_micro(config_path, fbar_spec, export_path, verify);
    if (macro->parsed())
      return cmd_macro(config_path, provider_name, out, threads);
    if (validate->parsed()) return cmd_validate(suite, threads);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitComputational;
  }
  return kExitUsage;
}

}  // namespace homog
