#include "nlshape/optimizer.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "nlshape/io.hpp"

namespace nlshape {

LevelSet shape_level_set(const MeshSource& src) {
  if (src.shape == "circle") return circle_level_set(src.center, src.radius);
  if (src.shape == "square") return square_level_set(src.center, src.half_width);
  if (src.shape == "ellipse") return ellipse_level_set(src.center, src.ax, src.ay);
  throw InputError("unknown shape '" + src.shape + "' (circle, square, ellipse)");
}

Mesh build_mesh(const MeshSource& src) {
  if (!src.path.empty()) return load_mesh(src.path, src.format, src.regions);
  return generate_box_mesh(src.box, shape_level_set(src));
}

void RunConfig::validate() const {
  problem.kernel.validate();
  if (!(epsilon > 0)) throw InputError("optimizer.epsilon must be > 0");
  if (!(problem.nu >= 0)) throw InputError("problem.nu must be >= 0");
  if (!(tol > 0)) throw InputError("optimizer.tol must be > 0");
  if (maxiter < 1) throw InputError("optimizer.maxiter must be >= 1");
  if (max_halvings < 0) throw InputError("optimizer.max_halvings must be >= 0");
  if (hessian_projection != "none" && hessian_projection != "clip" && hessian_projection != "abs")
    throw InputError("optimizer.hessian_projection must be none, clip or abs");
  if (output_dir.empty()) throw InputError("output.directory must not be empty");
}

TargetData generate_data(const Mesh& target, const Problem& problem, const SolverOptions& solver) {
  Assembler as(target, problem);
  Factorization fact(as.stiffness(), solver);
  return {target, solve_state(fact, as.dofs(), as.load())};
}

NodalField interpolate_data(const TargetData& data, const Mesh& mesh) {
  return NodalField(mesh, interpolate_nodal(data, mesh));
}

NewtonStep newton_step(const DerivativeBundle& bundle, double epsilon) {
  if (!(epsilon > 0)) throw InputError("epsilon must be > 0");
  const int n = static_cast<int>(bundle.grad.size());
  Triplets trip;
  const auto& fd = bundle.idofs.free_dofs;
  for (int i = 0; i < bundle.idofs.size(); ++i)
    for (int j = 0; j < bundle.idofs.size(); ++j)
      if (bundle.hess(i, j) != 0.0) trip.emplace_back(fd[i], fd[j], bundle.hess(i, j));
  SparseMatrix S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  S += epsilon * bundle.reg;
  S.makeCompressed();

  NewtonStep step;
  const Eigen::VectorXd rhs = -bundle.grad;
  if (rhs.norm() == 0.0) {
    step.W = Eigen::VectorXd::Zero(n);
    return step;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw NumericError("Newton system: LDLT factorization failed");
  const double dmin = ldlt.vectorD().minCoeff();
  if (!(dmin > 0.0)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "Newton system is not positive definite (smallest pivot %.3e); increase epsilon or "
                  "set optimizer.hessian_projection",
                  dmin);
    throw NumericError(msg);
  }
  step.W = ldlt.solve(rhs);
  step.residual = relative_residual(S, step.W, rhs);
  for (int k = 0; k < 8 && !(step.residual < 1e-10); ++k) {
    step.W += ldlt.solve(residual_vector(S, step.W, rhs));
    step.residual = relative_residual(S, step.W, rhs);
  }
  // For badly conditioned H + eps R the double nearest to the exact solution
  // already leaves |r|/|b| above 1e-10.  Accept the step when it is exact up
  // to rounding: componentwise backward error |r_i| / (|S||W| + |b|)_i.
  step.backward_error = componentwise_backward_error(S, step.W, rhs);
  if (!(step.residual < 1e-10) && !(step.backward_error < 1e-12)) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "Newton system residual %.3e above 1e-10 (backward error %.3e)", step.residual,
                  step.backward_error);
    throw NumericError(msg);
  }
  return step;
}

int clip_hessian(DerivativeBundle& bundle, bool mirror) {
  if (bundle.hess.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bundle.hess);
  Eigen::VectorXd lam = es.eigenvalues();
  int clipped = 0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] < 0) {
      lam[i] = mirror ? -lam[i] : 0;
      ++clipped;
    }
  bundle.hess = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  bundle.hess = 0.5 * (bundle.hess + bundle.hess.transpose()).eval();
  return clipped;
}

double l2_norm(const Mesh& mesh, const DofMap& dofs, const Eigen::VectorXd& W) {
  const SparseMatrix M = assemble_vector_mass(mesh, dofs);
  return std::sqrt(std::max(0.0, W.dot(M * W)));
}

RunHistory run(const RunConfig& cfg, const IterationHook& hook) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  Problem problem = cfg.problem;
  if (!problem.forcing.fn) problem.forcing = piecewise_forcing(cfg.f1, cfg.f2);
  ensure_directory(cfg.output_dir);

  const TargetData data = cfg.data_path.empty() ? generate_data(build_mesh(cfg.target), problem, cfg.solver)
                                                : load_target_data(cfg.data_path);
  Mesh mesh = build_mesh(cfg.initial);
  RunHistory hist;

  for (int k = 0; k < cfg.maxiter; ++k) {
    const NodalField ubar = interpolate_data(data, mesh);
    const StateBundle st = solve_states(mesh, problem, ubar, cfg.solver);
    DerivativeBundle db = derivative_bundle(st, ubar);
    const int clipped = cfg.hessian_projection != "none" ? clip_hessian(db, cfg.hessian_projection == "abs") : 0;
    const NewtonStep step = newton_step(db, cfg.epsilon);
    const DofMap& dofs = st.as->dofs();

    HistoryRecord rec{k, st.J, l2_norm(mesh, dofs, step.W), 0.0, "", 0, clipped};
    if (cfg.write_vtk) {
      char name[32];
      std::snprintf(name, sizeof name, "mesh_%03d.vtk", k);
      rec.mesh_file = name;
      write_vtk(cfg.output_dir + "/" + name, mesh, {{"u", &st.u}, {"v", &st.v}});
    }
    const bool done = rec.defnorm < cfg.tol;
    if (!done) {
      const VectorField W = dofs.extend_vector(step.W);
      double t = 1.0;
      Mesh next = displaced_mesh(mesh, W, t);
      while (has_inverted(next)) {
        if (rec.halvings == cfg.max_halvings)
          throw NumericError("mesh inverts after " + std::to_string(cfg.max_halvings) + " step halvings at iteration " +
                             std::to_string(k));
        ++rec.halvings;
        t *= 0.5;
        next = displaced_mesh(mesh, W, t);
      }
      hist.total_halvings += rec.halvings;
      mesh = std::move(next);
    }
    rec.walltime = elapsed();
    hist.records.push_back(rec);
    if (hook) hook(rec);
    if (done) {
      hist.converged = true;
      break;
    }
  }
  hist.final_mesh = mesh;
  return hist;
}

namespace {

double point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double l2 = d.squaredNorm();
  const double s = l2 > 0 ? std::clamp((p - a).dot(d) / l2, 0.0, 1.0) : 0.0;
  return (p - (a + s * d)).norm();
}

}  // namespace

double hausdorff_to_circle(const Mesh& mesh, Vec2 center, double radius) {
  const InterfaceEdges iface = extract_interface(mesh);
  if (iface.edges.empty()) throw InputError("mesh has no interface");
  double h = 0;
  for (const auto& e : iface.edges)
    for (int k = 0; k <= 8; ++k) {
      const Vec2 p = mesh.vertices[e.a] + (k / 8.0) * (mesh.vertices[e.b] - mesh.vertices[e.a]);
      h = std::max(h, std::abs((p - center).norm() - radius));
    }
  const int samples = 4096;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * M_PI * k / samples;
    const Vec2 p = center + radius * Vec2(std::cos(th), std::sin(th));
    double d = INFINITY;
    for (const auto& e : iface.edges) d = std::min(d, point_segment(p, mesh.vertices[e.a], mesh.vertices[e.b]));
    h = std::max(h, d);
  }
  return h;
}

}  // namespace nlshape
