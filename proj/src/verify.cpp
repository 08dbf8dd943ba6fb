#include "nlshape/verify.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "nlshape/dense_oracle.hpp"
#include "nlshape/io.hpp"

namespace nlshape {

namespace {

double rel_diff(double a, double ref) {
  const double s = std::abs(ref);
  return s > 1e-300 ? std::abs(a - ref) / s : std::abs(a - ref);
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  const double s = ref.norm();
  return s > 1e-300 ? (a - ref).norm() / s : (a - ref).norm();
}

CheckLine check(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = U(rng);
  return v;
}

Problem with_forcing(const RunConfig& run) {
  Problem p = run.problem;
  if (!p.forcing.fn) p.forcing = piecewise_forcing(run.f1, run.f2);
  return p;
}

}  // namespace

AnalyticField verification_data() { return quadratic_field({0.1, 0.2, -0.3, 0.5, 0.4, -0.2}); }

bool full_interaction(const Mesh& mesh, const KernelSpec& kernel) {
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return kernel.delta >= (hi - lo).norm();
}

bool VerifyReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

AssemblyComparison compare_with_dense(const Mesh& mesh, const Problem& problem, unsigned seed) {
  const bool full = full_interaction(mesh, problem.kernel);
  const double tol = full ? 1e-10 : 1e-6;
  // Full interaction, integrable: every integrand is a polynomial, so the
  // oracle uses its own higher-degree rules.  Otherwise both sides share a
  // refined rule.
  Problem pa = problem, po = problem;
  if (full && !problem.kernel.singular()) {
    po.quad.pair_degree = pa.quad.pair_degree + 3;
    po.quad.single_degree = pa.quad.single_degree + 3;
  } else {
    pa.quad.pair_degree = po.quad.pair_degree = std::max(problem.quad.pair_degree, 8);
    pa.quad.duffy_order = po.quad.duffy_order = std::max(problem.quad.duffy_order, 5);
    pa.quad.single_degree = po.quad.single_degree = std::max(problem.quad.single_degree, 8);
  }
  const Assembler as(mesh, pa);
  const DenseOracle dense(mesh, po, po.quad);
  const AnalyticField ub = verification_data();
  std::mt19937_64 rng(seed);
  const int n = mesh.num_nodes();
  const Eigen::VectorXd u = random_vector(n, rng), v = random_vector(n, rng);
  const Eigen::VectorXd psi = random_vector(n, rng), phi = random_vector(n, rng);
  const VectorField V = random_vector(2 * n, rng), W = random_vector(2 * n, rng);

  AssemblyComparison out;
  const std::string sfx = full ? " (full interaction)" : " (truncated)";
  out.checks.push_back(check("A" + sfx, rel_diff(Eigen::MatrixXd(as.stiffness_full()), dense.stiffness_full()), tol));
  out.checks.push_back(check("F" + sfx, rel_diff(as.load(), dense.load()), tol));
  out.checks.push_back(check("Ftilde" + sfx, rel_diff(as.tracking_load(u, ub), dense.tracking_load(u, ub)), tol));
  out.checks.push_back(check("tracking" + sfx, rel_diff(as.tracking(u, ub), dense.tracking(u, ub)), tol));
  const ShapeResiduals ra = as.shape_residuals(V, u, v, ub), rd = dense.shape_residuals(V, u, v, ub);
  out.checks.push_back(check("frakJ" + sfx, rel_diff(ra.frakJ, rd.frakJ), tol));
  out.checks.push_back(check("frakF" + sfx, rel_diff(ra.frakF, rd.frakF), tol));
  out.checks.push_back(check("frakA" + sfx, rel_diff(ra.frakA, rd.frakA), tol));
  const SecondOrderScalars sa = as.second_order(V, W, u, v, psi, phi, ub);
  const SecondOrderScalars sd = dense.second_order(V, W, u, v, psi, phi, ub);
  out.checks.push_back(check("J'' terms" + sfx, rel_diff(sa.jpp, sd.jpp), tol));
  out.checks.push_back(check("DJ[DV W] terms" + sfx, rel_diff(sa.dvw, sd.dvw), tol));
  const DofMap dofs = DofMap::from_mesh(mesh);
  const Eigen::MatrixXd Rfull = dense.regularizer_full();
  Eigen::MatrixXd Rd(2 * dofs.num_free(), 2 * dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i)
    for (int j = 0; j < dofs.num_free(); ++j)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          Rd(2 * i + a, 2 * j + b) = Rfull(2 * dofs.free_nodes[i] + a, 2 * dofs.free_nodes[j] + b);
  out.checks.push_back(check("j_reg", rel_diff(Eigen::MatrixXd(regularizer_matrix(mesh, dofs)), Rd), 1e-10));
  return out;
}

VerifyReport run_verify(const AppConfig& cfg, const std::string& suite, const VerifyOptions& opt,
                        const std::string& out_dir) {
  ensure_directory(out_dir);
  const Problem problem = with_forcing(cfg.run);
  const Mesh mesh = build_mesh(cfg.run.initial);
  const bool full = full_interaction(mesh, problem.kernel);
  const AnalyticField ub = verification_data();
  VerifyReport rep;
  rep.suite = suite;

  if (suite == "assembly") {
    if (mesh.num_triangles() > 64) throw InputError("assembly suite expects a small mesh (<= 64 triangles)");
    rep.checks = compare_with_dense(mesh, problem, opt.seed).checks;
    const std::string path = out_dir + "/assembly.csv";
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out.precision(6);
    out << "form,rel_diff,tol,pass\n";
    for (const auto& c : rep.checks) out << c.name << ',' << c.value << ',' << c.tol << ',' << c.pass << '\n';
    rep.files.push_back(path);
    return rep;
  }

  if (suite == "norms") {
    const NormReport nr = norm_checks(mesh, problem, std::max(opt.samples, 1), opt.seed);
    rep.checks.push_back({"coercivity C_* > 0", nr.coercivity, 0.0, nr.coercivity > 0});
    rep.checks.push_back({"L2 lower >= 1e-8", nr.l2_lower, 1e-8, nr.l2_lower >= 1e-8});
    rep.checks.push_back({"L2 upper <= 1e8", nr.l2_upper, 1e8, nr.l2_upper <= 1e8});
    if (nr.singular) {
      rep.checks.push_back({"H^s lower >= 1e-8", nr.hs_lower, 1e-8, nr.hs_lower >= 1e-8});
      rep.checks.push_back({"H^s upper <= 1e8", nr.hs_upper, 1e8, nr.hs_upper <= 1e8});
    }
    const std::string path = out_dir + "/norms.csv";
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out.precision(10);
    out << "dofs,coercivity,l2_lower,l2_upper,sample_lower,sample_upper,hs_lower,hs_upper\n"
        << nr.dofs << ',' << nr.coercivity << ',' << nr.l2_lower << ',' << nr.l2_upper << ',' << nr.sample_lower << ','
        << nr.sample_upper << ',' << nr.hs_lower << ',' << nr.hs_upper << '\n';
    rep.files.push_back(path);
    return rep;
  }

  const StateBundle st = solve_states(mesh, problem, ub);
  const InterfaceDofs idofs = interface_dofs(mesh, st.iface, st.as->dofs());
  if (idofs.size() == 0) throw InputError("mesh has no free interface nodes");
  FdOptions fo;
  fo.t_list = opt.t_list;

  if (suite == "fd1") {
    const double tol = full ? 1e-4 : 1e-2;
    const Eigen::VectorXd g = first_derivative_vector(st, ub);
    std::vector<FdTable> tabs;
    for (int k = 0; k < opt.samples; ++k) {
      const VectorField V = random_interface_field(mesh, idofs, opt.seed + k);
      tabs.push_back(fd_first(mesh, problem, ub, V, g.dot(V), fo));
      rep.checks.push_back(check("fd1 sample " + std::to_string(k), tabs.back().best_rel_err(), tol));
    }
    write_fd_csv(out_dir + "/fd1.csv", tabs);
    rep.files.push_back(out_dir + "/fd1.csv");
    if (!full) {
      // Same differences with the interaction indicator frozen on the
      // undeformed mesh: isolates the motion of the horizon boundary, which
      // the assembled derivative does not contain.  Reported, not graded.
      FdOptions carried = fo;
      carried.carry_horizon = true;
      std::vector<FdTable> ctabs;
      for (int k = 0; k < opt.samples; ++k) {
        const VectorField V = random_interface_field(mesh, idofs, opt.seed + k);
        ctabs.push_back(fd_first(mesh, problem, ub, V, g.dot(V), carried));
        rep.diagnostics.push_back(check("fd1 carried horizon sample " + std::to_string(k), ctabs.back().best_rel_err(), 1e-4));
      }
      write_fd_csv(out_dir + "/fd1_carried.csv", ctabs);
      rep.files.push_back(out_dir + "/fd1_carried.csv");
    }
    return rep;
  }

  if (suite == "fd2") {
    const HessianResult hr = hessian_matrix(st, ub);
    auto contract = [&](const VectorField& A, const VectorField& B) {
      Eigen::VectorXd a(idofs.size()), b(idofs.size());
      for (int i = 0; i < idofs.size(); ++i) {
        const int node = idofs.nodes[i / 2], c = i % 2;
        a[i] = A[2 * node + c];
        b[i] = B[2 * node + c];
      }
      return a.dot(hr.H * b);
    };
    const int pairs = std::max(1, opt.samples / 2);
    std::vector<FdTable> tabs;
    for (int k = 0; k < pairs; ++k) {
      const VectorField V = random_interface_field(mesh, idofs, opt.seed + 2 * k);
      const VectorField W = random_interface_field(mesh, idofs, opt.seed + 2 * k + 1);
      tabs.push_back(fd_second(mesh, problem, ub, V, contract(V, V), fo));
      rep.checks.push_back(check("fd2 diagonal " + std::to_string(k), tabs.back().best_rel_err(), 1e-3));
      tabs.push_back(fd_polarization(mesh, problem, ub, V, W, contract(V, W), fo));
      rep.checks.push_back(check("fd2 polarization " + std::to_string(k), tabs.back().best_rel_err(), 1e-2));
    }
    // structure identity without the perimeter term
    Problem p0 = problem;
    p0.nu = 0.0;
    const StateBundle s0 = solve_states(mesh, p0, ub);
    const SpatialField Vf = random_affine_field(opt.seed + 101);
    const VectorField V = sample_field(mesh, Vf);
    const VectorField W = random_interface_field(mesh, idofs, opt.seed + 102);
    const SecondDerivative sd = second_derivative(s0, ub, V, W);
    tabs.push_back(fd_structure(mesh, p0, ub, Vf, W, sd.jpp + sd.dvw, fo));
    rep.checks.push_back(check("structure identity", tabs.back().best_rel_err(), 1e-3));
    write_fd_csv(out_dir + "/fd2.csv", tabs);
    rep.files.push_back(out_dir + "/fd2.csv");
    return rep;
  }

  throw InputError("unknown verification suite '" + suite + "' (fd1, fd2, assembly, norms)");
}

}  // namespace nlshape
