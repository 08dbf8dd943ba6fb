#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "nlshape/config.hpp"
#include "nlshape/io.hpp"
#include "nlshape/parallel.hpp"
#include "nlshape/verify.hpp"

using namespace nlshape;

namespace {

constexpr int kOk = 0, kConfigError = 1, kRuntimeError = 2, kToleranceFailure = 3;

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "Config file (JSON)")->required();
  cmd->add_option("-o,--out", c.out, "Output directory (overrides output.directory)");
  cmd->add_option("-t,--threads", c.threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
}

AppConfig prepare(const Common& c) {
  AppConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.run.output_dir = c.out;
  set_num_threads(c.threads);
  return cfg;
}

int cmd_run(const Common& c, int maxiter, const std::string& projection) {
  AppConfig cfg = prepare(c);
  if (maxiter > 0) cfg.run.maxiter = maxiter;
  if (!projection.empty()) cfg.run.hessian_projection = projection;
  cfg.run.validate();
  const std::string dir = cfg.run.output_dir;
  RunHistory hist = run(cfg.run, [](const HistoryRecord& r) {
    std::cout << "iter " << r.iter << "  J " << r.J << "  |W|_L2 " << r.defnorm << "  halvings " << r.halvings
              << "  clipped " << r.clipped << "  " << r.walltime << " s" << std::endl;
  });
  write_history_csv(dir + "/history.csv", hist);
  save_native(hist.final_mesh, dir + "/final_mesh.json");
  nlohmann::json s;
  s["converged"] = hist.converged;
  s["iterations"] = hist.records.size();
  s["total_halvings"] = hist.total_halvings;
  s["J_initial"] = hist.records.front().J;
  s["J_final"] = hist.records.back().J;
  s["defnorm_final"] = hist.records.back().defnorm;
  if (cfg.run.target.path.empty() && cfg.run.target.shape == "circle")
    s["hausdorff_to_target"] = hausdorff_to_circle(hist.final_mesh, cfg.run.target.center, cfg.run.target.radius);
  std::ofstream(dir + "/summary.json") << s.dump(2) << '\n';
  std::cout << (hist.converged ? "converged" : "stopped at maxiter") << " after " << hist.records.size()
            << " iterations; history in " << dir << "/history.csv\n";
  return kOk;
}

int cmd_verify(const Common& c, const std::string& suite, const VerifyOptions& opt) {
  const AppConfig cfg = prepare(c);
  const VerifyReport rep = run_verify(cfg, suite, opt, cfg.run.output_dir);
  for (const auto& ch : rep.checks)
    std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.value << " (tol " << ch.tol << ")\n";
  for (const auto& ch : rep.diagnostics)
    std::cout << "info " << ch.name << ": " << ch.value << " (would pass at " << ch.tol << ": " << (ch.pass ? "yes" : "no")
              << ")\n";
  for (const auto& f : rep.files) std::cout << "report: " << f << '\n';
  return rep.pass() ? kOk : kToleranceFailure;
}

int cmd_gendata(const Common& c) {
  const AppConfig cfg = prepare(c);
  Problem p = cfg.run.problem;
  p.forcing = piecewise_forcing(cfg.run.f1, cfg.run.f2);
  ensure_directory(cfg.run.output_dir);
  const TargetData data = generate_data(build_mesh(cfg.run.target), p, cfg.run.solver);
  const std::string path = cfg.run.output_dir + "/ubar.json";
  save_target_data(path, data);
  std::cout << "wrote " << path << " (" << data.values.size() << " nodal values, max |u| "
            << (data.values.size() ? data.values.cwiseAbs().maxCoeff() : 0.0) << ")\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface identification with nonlocal Dirichlet problems: shape Newton solver and verification"};
  app.require_subcommand(1);

  Common run_c, ver_c, gen_c;
  int maxiter = 0;
  std::string projection;
  auto* run_cmd = app.add_subcommand("run", "Run the shape optimization loop");
  add_common(run_cmd, run_c);
  run_cmd->add_option("--maxiter", maxiter, "Override optimizer.maxiter")->check(CLI::PositiveNumber);
  run_cmd->add_option("--hessian-projection", projection, "Override optimizer.hessian_projection")
      ->check(CLI::IsMember({"none", "clip", "abs"}));

  std::string suite;
  VerifyOptions vopt;
  auto* ver_cmd = app.add_subcommand("verify", "Run a verification suite against the oracles");
  add_common(ver_cmd, ver_c);
  ver_cmd->add_option("-s,--suite", suite, "fd1, fd2, assembly or norms")
      ->required()
      ->check(CLI::IsMember({"fd1", "fd2", "assembly", "norms"}));
  ver_cmd->add_option("--samples", vopt.samples, "Random directions / samples")->check(CLI::PositiveNumber);
  ver_cmd->add_option("--seed", vopt.seed, "Random seed");

  auto* gen_cmd = app.add_subcommand("gendata", "Solve the state on the target mesh and store it as data");
  add_common(gen_cmd, gen_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run_c, maxiter, projection);
    if (*ver_cmd) return cmd_verify(ver_c, suite, vopt);
    return cmd_gendata(gen_c);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
