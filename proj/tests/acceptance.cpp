// Acceptance run: one PASS/FAIL line per criterion, followed by indented
// detail lines.  Optional arguments select criteria by key, e.g.
//   acceptance assembly fd2
// Outputs (CSV reports, histories, VTK) go to ./acceptance_out.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nlshape/config.hpp"
#include "nlshape/io.hpp"
#include "nlshape/verify.hpp"

using namespace nlshape;

namespace {

const std::string kOut = "acceptance_out";

std::string src(const std::string& rel) { return std::string(NLSHAPE_SOURCE_DIR) + "/" + rel; }

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;
  void note(const std::string& s) { details.push_back(s); }
  void require(bool ok, const std::string& s) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "miss ") + s);
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Mesh scaled(Mesh m, double s) {
  for (auto& p : m.vertices) p *= s;
  return m;
}

Problem custom_problem(double delta) {
  Problem p;
  p.kernel.kind = KernelClass::Integrable;
  p.kernel.delta = delta;
  p.kernel.normalizer = 1.0;
  p.kernel.sigma11 = 0.5;
  p.kernel.sigma12 = 2.0;
  p.kernel.sigma21 = 1.0;
  p.kernel.sigma22 = 3.0;
  p.kernel.sigma1I = 1.0;
  p.kernel.sigma2I = 1.5;
  p.forcing = piecewise_forcing(10, -10);
  return p;
}

Problem preset_problem(const KernelSpec& k) {
  Problem p;
  p.kernel = k;
  p.forcing = piecewise_forcing(10, -10);
  return p;
}

Mesh box(int cells, double collar, const LevelSet& ls) {
  BoxMeshSpec spec;
  spec.cells_per_unit = cells;
  spec.collar = collar;
  return generate_box_mesh(spec, ls);
}

void add_report(Outcome& o, const VerifyReport& r, const std::string& label) {
  for (const auto& c : r.checks) o.require(c.pass, label + c.name + fmt(": %.3e (tol %.0e)", c.value, c.tol));
  for (const auto& c : r.diagnostics) o.note("info " + label + c.name + fmt(": %.3e", c.value));
}

Outcome assembly_oracle() {
  Outcome o;
  const Mesh m = load_mesh(src("data/tiny8.json"), MeshFormat::Native);
  Problem sing_full = preset_problem(preset_gamma2(0.3));
  sing_full.kernel.delta = 3.0;
  const std::vector<std::pair<std::string, std::pair<Mesh, Problem>>> cases{
      {"full nonsymmetric", {m, custom_problem(3.0)}},
      {"truncated delta 0.6", {m, custom_problem(0.6)}},
      {"gamma1 scaled", {scaled(m, 0.1), preset_problem(preset_gamma1())}},
      {"gamma2 scaled", {scaled(m, 0.1), preset_problem(preset_gamma2(0.5))}},
      {"singular full s=0.3", {m, sing_full}},
  };
  unsigned seed = 1;
  for (const auto& [name, mp] : cases) {
    double worst = 0, tol = 0;
    bool ok = true;
    for (const auto& c : compare_with_dense(mp.first, mp.second, seed++).checks) {
      ok = ok && c.pass;
      if (c.value >= worst) {
        worst = c.value;
        tol = c.tol;
      }
      if (!c.pass) o.note("  " + c.name + fmt(": %.3e", c.value));
    }
    o.require(ok, name + fmt(": largest difference %.2e (its tol %.0e)", worst, tol));
  }
  return o;
}

Outcome null_space() {
  Outcome o;
  const Mesh m = box(10, 0.1, circle_level_set({0.5, 0.5}, 0.25));
  for (const auto& [name, k] : std::vector<std::pair<std::string, KernelSpec>>{{"gamma1", preset_gamma1()},
                                                                              {"gamma2", preset_gamma2(0.5)}}) {
    const Assembler as(m, preset_problem(k));
    const SparseMatrix K = as.stiffness_full();
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.num_nodes());
    const double ns = (K * one).norm() / (K.norm() * one.norm());
    o.require(ns <= 1e-10, name + fmt(" |A 1| / (|A| |1|) = %.2e", ns));
    const SparseMatrix A = as.stiffness();
    const double sym = SparseMatrix(A - SparseMatrix(A.transpose())).norm() / A.norm();
    o.require(sym < 1e-10, name + fmt(" symmetry defect %.2e", sym));
  }
  return o;
}

AppConfig preset_config(const std::string& kernel) {
  return parse_config(R"({"kernel": {)" + kernel + R"(}, "problem": {"nu": 0.01, "domain": {"collar": 0.25},
      "initial": {"shape": "square", "center": [0.5, 0.5], "half_width": 0.25, "cells_per_unit": 8}}})",
                      "<preset>");
}

Outcome fd_gradient() {
  Outcome o;
  VerifyOptions opt;
  opt.samples = 10;
  const AppConfig full = load_config(src("configs/fixture_full.json"));
  o.note(fmt("fixture: %.0f triangles", build_mesh(full.run.initial).num_triangles()));
  add_report(o, run_verify(full, "fd1", opt, kOut + "/fd1_full"), "full ");
  add_report(o, run_verify(preset_config(R"("preset": "gamma1", "delta": 0.25)"), "fd1", opt, kOut + "/fd1_gamma1"),
             "gamma1 ");
  add_report(o,
             run_verify(preset_config(R"("preset": "gamma2", "delta": 0.25, "s": 0.5)"), "fd1", opt, kOut + "/fd1_gamma2"),
             "gamma2 ");
  return o;
}

Outcome fd_hessian() {
  Outcome o;
  VerifyOptions opt;
  opt.samples = 10;
  add_report(o, run_verify(load_config(src("configs/fixture_full.json")), "fd2", opt, kOut + "/fd2_full"), "");
  return o;
}

Outcome perimeter_calculus() {
  Outcome o;
  auto nodal = [](const Mesh& m, const std::function<Vec2(const Vec2&)>& f) {
    VectorField V(2 * m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) V.segment<2>(2 * i) = f(m.vertices[i]);
    return V;
  };
  std::vector<double> err, dil;
  for (int n : {32, 64, 128}) {
    const Mesh m = generate_polar_mesh(n, 1.0, 1.5, 2.0);
    const InterfaceEdges g = extract_interface(m);
    const VectorField X = nodal(m, [](const Vec2& p) { return p; });
    const VectorField R = nodal(m, [](const Vec2& p) { return Vec2(-p.y(), p.x()); });
    err.push_back(std::abs(perimeter_first(m, g, X) - 2 * std::numbers::pi));
    dil.push_back(std::abs(perimeter_second(m, g, X, X)));
    const double rot = std::abs(perimeter_first(m, g, R));
    o.require(rot <= 1e-12, fmt("n=%.0f rotation %.1e", n, rot));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    const double ratio = err[k] / err[k - 1];
    o.require(std::abs(ratio - 0.25) <= 0.02, fmt("error ratio %.4f under halving h (O(h^2) -> 0.25)", ratio));
  }
  o.require(dil.back() <= 1e-10, fmt("dilation second derivative %.2e", dil.back()));
  return o;
}

Outcome stationarity() {
  Outcome o;
  const Mesh m = box(8, 0.25, square_level_set({0.5, 0.5}, 0.25));
  for (const auto& [name, p] : std::vector<std::pair<std::string, Problem>>{
           {"full fixture", custom_problem(3.0)}, {"gamma1", preset_problem(preset_gamma1())},
           {"gamma2", preset_problem(preset_gamma2(0.5))}}) {
    const StateBundle st0 = solve_states(m, p, verification_data());
    const NodalField ub(m, st0.u);
    const StateBundle st = solve_states(m, p, ub);
    const double g = first_derivative_vector(st, ub).lpNorm<Eigen::Infinity>();
    const double bound = 1e-8 * std::max(1.0, std::abs(st.J));
    o.require(g <= bound, name + fmt(" |grad|_inf = %.2e (bound %.2e)", g, bound));
  }
  return o;
}

Outcome norm_report() {
  Outcome o;
  VerifyOptions opt;
  add_report(o, run_verify(load_config(src("configs/fixture_tiny.json")), "norms", opt, kOut + "/norms_tiny"), "tiny8 ");
  add_report(o, run_verify(load_config(src("configs/fixture_full.json")), "norms", opt, kOut + "/norms_full"), "full ");
  add_report(o, run_verify(preset_config(R"("preset": "gamma1", "delta": 0.25)"), "norms", opt, kOut + "/norms_g1"),
             "gamma1 ");
  add_report(o,
             run_verify(preset_config(R"("preset": "gamma2", "delta": 0.25, "s": 0.5)"), "norms", opt, kOut + "/norms_g2"),
             "gamma2 ");
  return o;
}

Outcome example(const std::string& name) {
  Outcome o;
  AppConfig cfg = load_config(src("configs/" + name + ".json"));
  cfg.run.output_dir = kOut + "/" + name;
  const double h = 1.0 / cfg.run.initial.box.cells_per_unit;
  o.note(fmt("initial mesh %.0f triangles, h = %.4f", build_mesh(cfg.run.initial).num_triangles(), h));
  const RunHistory hist = run(cfg.run, [&](const HistoryRecord& r) {
    std::fprintf(stderr, "  [%s] iter %d J %.6e |W| %.3e halvings %d clipped %d t %.0fs\n", name.c_str(), r.iter, r.J,
                 r.defnorm, r.halvings, r.clipped, r.walltime);
  });
  write_history_csv(cfg.run.output_dir + "/history.csv", hist);
  const auto& recs = hist.records;
  const double J0 = recs.front().J, J1 = recs.back().J;
  const double haus = hausdorff_to_circle(hist.final_mesh, cfg.run.target.center, cfg.run.target.radius);
  o.require(hist.converged && static_cast<int>(recs.size()) <= 50,
            fmt("%.0f iterations, final |W| = %.3e (target < 5e-5)", recs.size(), recs.back().defnorm));
  o.require(haus <= 2 * h, fmt("Hausdorff to target circle %.4f (bound 2h = %.4f)", haus, 2 * h));
  o.require(J1 <= 0.1 * J0, fmt("J %.4e -> %.4e (%.1f%% decrease)", J0, J1, 100 * (1 - J1 / J0)));
  double minW = 1e300;
  for (const auto& r : recs) minW = std::min(minW, r.defnorm);
  o.note(fmt("smallest |W| over the run %.3e; total step halvings %.0f", minW, hist.total_halvings));

  // Objective along concentric circles with the run's data, for context.
  Problem p = cfg.run.problem;
  p.forcing = piecewise_forcing(cfg.run.f1, cfg.run.f2);
  const TargetData data = generate_data(build_mesh(cfg.run.target), p, cfg.run.solver);
  std::string line = "J on circles:";
  for (double r : {0.15, 0.2, 0.25, 0.3}) {
    MeshSource s = cfg.run.initial;
    s.shape = "circle";
    s.center = cfg.run.target.center;
    s.radius = r;
    const Mesh m = build_mesh(s);
    const double J = reduced_functional(m, p, interpolate_data(data, m), cfg.run.solver);
    const double per = p.nu * perimeter(m, extract_interface(m));
    line += fmt(" r=%.2f %.3e (tracking %.2e)", r, J, J - per);
  }
  o.note(line);
  return o;
}

struct Criterion {
  std::string key, title;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"assembly", "Assembly oracle equivalence", assembly_oracle},
      {"nullspace", "Symmetric-kernel null space and symmetry", null_space},
      {"fd1", "FD gradient (full fixture 1e-4, gamma1/gamma2 presets 1e-2)", fd_gradient},
      {"fd2", "FD Hessian diagonal, polarization and structure identity", fd_hessian},
      {"perimeter", "Perimeter calculus on polygonal circles", perimeter_calculus},
      {"stationarity", "Stationarity at the data-generating interface", stationarity},
      {"example1", "End-to-end Example 1 (gamma1, square -> circle)", [] { return example("example1"); }},
      {"example2", "End-to-end Example 2 (gamma2, s = 0.5)", [] { return example("example2"); }},
      {"norms", "Coercivity and norm-equivalence report", norm_report},
  };
  std::set<std::string> pick(argv + 1, argv + argc);
  ensure_directory(kOut);
  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.key)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.title << fmt(" [%.1fs]", secs) << '\n';
    for (const auto& d : o.details) std::cout << "    " << d << '\n';
    std::cout.flush();
    if (!o.pass) ++failed;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
