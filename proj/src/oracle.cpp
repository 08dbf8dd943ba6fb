#include "nlshape/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace nlshape {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rel(double fd, double a) {
  const double s = std::abs(fd);
  return s > 0 ? std::abs(fd - a) / s : std::abs(fd - a);
}

bool steps_ok(const Mesh& mesh, const VectorField& V, double t) {
  return !has_inverted(displaced_mesh(mesh, V, t)) && !has_inverted(displaced_mesh(mesh, V, -t));
}

double J_at(const Mesh& mesh, const Problem& p, const DataField& ub, const VectorField& V, double t,
            const FdOptions& opt) {
  const Mesh m = deform_mesh(mesh, V, t);
  return reduced_functional(m, p, ub, opt.solver, opt.carry_horizon ? &mesh : nullptr);
}

}  // namespace

double reduced_functional(const Mesh& mesh, const Problem& problem, const DataField& ubar, const SolverOptions& solver,
                          const Mesh* horizon_ref) {
  const Assembler as(mesh, problem, horizon_ref);
  const Factorization fact(as.stiffness(), solver);
  const Eigen::VectorXd u = solve_state(fact, as.dofs(), as.load());
  double per = 0;
  for (const auto& e : extract_interface(mesh).edges) per += e.length;
  return as.tracking(u, ubar) + problem.nu * per;
}

double FdTable::best_rel_err() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (!std::isnan(r.rel_err)) best = std::min(best, r.rel_err);
  return best;
}

FdTable fd_first(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                 double assembled, const FdOptions& opt) {
  FdTable tab{"first", {}};
  for (double t : opt.t_list) {
    if (!steps_ok(mesh, V, t)) {
      tab.rows.push_back({t, kNaN, assembled, kNaN});
      continue;
    }
    const double fd = (J_at(mesh, problem, ubar, V, t, opt) - J_at(mesh, problem, ubar, V, -t, opt)) / (2 * t);
    tab.rows.push_back({t, fd, assembled, rel(fd, assembled)});
  }
  return tab;
}

FdTable fd_second(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                  double assembled, const FdOptions& opt) {
  FdTable tab{"second", {}};
  const double J0 = reduced_functional(mesh, problem, ubar, opt.solver);
  for (double t : opt.t_list) {
    if (!steps_ok(mesh, V, t)) {
      tab.rows.push_back({t, kNaN, assembled, kNaN});
      continue;
    }
    const double fd =
        (J_at(mesh, problem, ubar, V, t, opt) - 2 * J0 + J_at(mesh, problem, ubar, V, -t, opt)) / (t * t);
    tab.rows.push_back({t, fd, assembled, rel(fd, assembled)});
  }
  return tab;
}

FdTable fd_polarization(const Mesh& mesh, const Problem& problem, const DataField& ubar, const VectorField& V,
                        const VectorField& W, double assembled, const FdOptions& opt) {
  FdTable tab{"polarization", {}};
  const double J0 = reduced_functional(mesh, problem, ubar, opt.solver);
  const VectorField S = V + W, D = V - W;
  for (double t : opt.t_list) {
    if (!steps_ok(mesh, S, t) || !steps_ok(mesh, D, t)) {
      tab.rows.push_back({t, kNaN, assembled, kNaN});
      continue;
    }
    const double fs =
        (J_at(mesh, problem, ubar, S, t, opt) - 2 * J0 + J_at(mesh, problem, ubar, S, -t, opt)) / (t * t);
    const double fdd =
        (J_at(mesh, problem, ubar, D, t, opt) - 2 * J0 + J_at(mesh, problem, ubar, D, -t, opt)) / (t * t);
    const double fd = 0.25 * (fs - fdd);
    tab.rows.push_back({t, fd, assembled, rel(fd, assembled)});
  }
  return tab;
}

VectorField sample_field(const Mesh& mesh, const SpatialField& F) {
  VectorField V = VectorField::Zero(2 * mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (!mesh.constrained[i]) V.segment<2>(2 * i) = F(mesh.vertices[i]);
  return V;
}

FdTable fd_structure(const Mesh& mesh, const Problem& problem, const DataField& ubar, const SpatialField& V,
                     const VectorField& W, double assembled, const FdOptions& opt) {
  FdTable tab{"structure", {}};
  auto DJ = [&](double t) {
    const Mesh m = deform_mesh(mesh, W, t);
    const StateBundle st = solve_states(m, problem, ubar, opt.solver, opt.carry_horizon ? &mesh : nullptr);
    return first_derivative(st, ubar, sample_field(m, V));
  };
  for (double t : opt.t_list) {
    if (!steps_ok(mesh, W, t)) {
      tab.rows.push_back({t, kNaN, assembled, kNaN});
      continue;
    }
    const double fd = (DJ(t) - DJ(-t)) / (2 * t);
    tab.rows.push_back({t, fd, assembled, rel(fd, assembled)});
  }
  return tab;
}

void write_fd_csv(const std::string& path, const std::vector<FdTable>& tables) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out.precision(17);
  out << "t,fd,assembled,rel_err\n";
  for (const auto& tab : tables)
    for (const auto& r : tab.rows) out << r.t << ',' << r.fd << ',' << r.assembled << ',' << r.rel_err << '\n';
}

VectorField random_interface_field(const Mesh& mesh, const InterfaceDofs& idofs, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  VectorField V = VectorField::Zero(2 * mesh.num_nodes());
  double mx = 0;
  for (int n : idofs.nodes) {
    V[2 * n] = U(rng);
    V[2 * n + 1] = U(rng);
    mx = std::max(mx, std::hypot(V[2 * n], V[2 * n + 1]));
  }
  if (mx > 0) V /= mx;
  return V;
}

SpatialField random_affine_field(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec2 a(U(rng), U(rng));
  Eigen::Matrix2d B;
  B << U(rng), U(rng), U(rng), U(rng);
  return [a, B](const Vec2& x) { return Vec2(a + B * x); };
}

NormReport norm_checks(const Mesh& mesh, const Problem& problem, int samples, unsigned seed) {
  NormReport rep;
  const Assembler as(mesh, problem);
  const SparseMatrix K = as.stiffness();
  const Eigen::MatrixXd S = 0.5 * (Eigen::MatrixXd(K) + Eigen::MatrixXd(K).transpose());
  const Eigen::MatrixXd M = Eigen::MatrixXd(as.dofs().restrict_matrix(assemble_mass(mesh)));
  rep.dofs = static_cast<int>(S.rows());
  if (rep.dofs == 0) throw InputError("norm checks: mesh has no free dofs");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  rep.coercivity = es.eigenvalues().minCoeff();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gs(S, M, Eigen::EigenvaluesOnly);
  rep.l2_lower = gs.eigenvalues().minCoeff();
  rep.l2_upper = gs.eigenvalues().maxCoeff();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  rep.samples = samples;
  rep.sample_lower = std::numeric_limits<double>::infinity();
  rep.sample_upper = 0;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd u(rep.dofs);
    for (auto& x : u) x = N(rng);
    const double q = u.dot(S * u) / u.dot(M * u);
    rep.sample_lower = std::min(rep.sample_lower, q);
    rep.sample_upper = std::max(rep.sample_upper, q);
  }
  if (problem.kernel.singular()) {
    rep.singular = true;
    // Gagliardo seminorm: twice the form with unit coefficients and no truncation
    Problem hs = problem;
    Vec2 lo = mesh.vertices.front(), hi = lo;
    for (const auto& p : mesh.vertices) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    hs.kernel.delta = 2.0 * (hi - lo).norm();
    hs.kernel.normalizer = 1.0;
    hs.kernel.sigma11 = hs.kernel.sigma12 = hs.kernel.sigma21 = hs.kernel.sigma22 = hs.kernel.sigma1I =
        hs.kernel.sigma2I = 1.0;
    const Assembler ah(mesh, hs);
    const Eigen::MatrixXd H = Eigen::MatrixXd(ah.stiffness());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gh(S, H + H.transpose(),
                                                                  Eigen::EigenvaluesOnly);
    rep.hs_lower = gh.eigenvalues().minCoeff();
    rep.hs_upper = gh.eigenvalues().maxCoeff();
  }
  return rep;
}

}  // namespace nlshape
