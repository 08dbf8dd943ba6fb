#include "nlshape/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace nlshape {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
    throw InputError(source_ + ":" + std::to_string(line_of(path)) + ": " + dotted + ": " + msg);
  }

  void check_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected a table");
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!allowed.count(key)) {
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key");
      }
    }
  }

  template <class T>
  void get(const json& obj, const std::vector<std::string>& path, const std::string& key, T& out) const {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    auto p = path;
    p.push_back(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) fail(p, "expected a number");
      } else if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) fail(p, "expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) fail(p, "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) fail(p, "expected a string");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(p, e.what());
    }
  }

  void get_vec2(const json& obj, const std::vector<std::string>& path, const std::string& key, Vec2& out) const {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    auto p = path;
    p.push_back(key);
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
      fail(p, "expected [x, y]");
    out = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto q = text_.find("\"" + key + "\"", pos);
      if (q == std::string::npos) break;
      pos = q;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

 private:
  const std::string& text_;
  std::string source_;
};

Region parse_region(const Reader& r, const std::vector<std::string>& path, const std::string& s) {
  if (s == "Omega1") return Region::Omega1;
  if (s == "Omega2") return Region::Omega2;
  if (s == "Interaction") return Region::Interaction;
  r.fail(path, "region must be Omega1, Omega2 or Interaction");
}

void read_mesh_source(const Reader& r, const json& j, const std::vector<std::string>& path, MeshSource& src,
                      const std::string& base_dir) {
  r.check_keys(j, path,
               {"mesh", "format", "regions", "shape", "center", "radius", "half_width", "axes", "cells_per_unit"});
  std::string mesh;
  r.get(j, path, "mesh", mesh);
  if (!mesh.empty()) {
    const std::filesystem::path p(mesh);
    src.path = p.is_absolute() ? mesh : (std::filesystem::path(base_dir) / p).string();
    std::string fmt = src.path.size() > 4 && src.path.substr(src.path.size() - 4) == ".msh" ? "gmsh" : "native";
    r.get(j, path, "format", fmt);
    if (fmt == "gmsh")
      src.format = MeshFormat::Gmsh;
    else if (fmt == "native")
      src.format = MeshFormat::Native;
    else
      r.fail(path, "format must be \"gmsh\" or \"native\"");
    if (auto it = j.find("regions"); it != j.end()) {
      auto rp = path;
      rp.push_back("regions");
      if (!it->is_object()) r.fail(rp, "expected a table mapping physical tags to regions");
      for (const auto& [tag, name] : it->items()) {
        auto tp = rp;
        tp.push_back(tag);
        if (!name.is_string()) r.fail(tp, "expected a region name");
        src.regions[tag] = parse_region(r, tp, name.get<std::string>());
      }
    }
  }
  r.get(j, path, "shape", src.shape);
  if (src.shape != "circle" && src.shape != "square" && src.shape != "ellipse")
    r.fail(path, "shape must be circle, square or ellipse");
  r.get_vec2(j, path, "center", src.center);
  r.get(j, path, "radius", src.radius);
  r.get(j, path, "half_width", src.half_width);
  Vec2 axes(src.ax, src.ay);
  r.get_vec2(j, path, "axes", axes);
  src.ax = axes.x();
  src.ay = axes.y();
  r.get(j, path, "cells_per_unit", src.box.cells_per_unit);
  if (!(src.radius > 0) || !(src.half_width > 0) || !(src.ax > 0) || !(src.ay > 0))
    r.fail(path, "shape sizes must be positive");
  if (src.box.cells_per_unit < 2) r.fail(path, "cells_per_unit must be >= 2");
}

}  // namespace

AppConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto pos = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
    throw InputError(source + ":" + std::to_string(line) + ": syntax error: " + e.what());
  }
  Reader r(text, source);
  r.check_keys(doc, {}, {"kernel", "problem", "optimizer", "output"});
  AppConfig cfg;
  cfg.source = source;
  RunConfig& run = cfg.run;
  const json empty = json::object();
  auto table = [&](const char* name) -> const json& {
    auto it = doc.find(name);
    return it == doc.end() ? empty : *it;
  };

  // [kernel]
  {
    const json& k = table("kernel");
    const std::vector<std::string> P{"kernel"};
    r.check_keys(k, P, {"preset", "class", "delta", "s", "normalizer", "sigma", "quadrature"});
    std::string preset = "gamma1";
    r.get(k, P, "preset", preset);
    KernelSpec& spec = run.problem.kernel;
    if (preset == "gamma1")
      spec = preset_gamma1();
    else if (preset == "gamma2")
      spec = preset_gamma2();
    else if (preset != "custom")
      r.fail({"kernel", "preset"}, "expected gamma1, gamma2 or custom");
    std::string cls = spec.singular() ? "singular" : "integrable";
    r.get(k, P, "class", cls);
    if (cls == "integrable")
      spec.kind = KernelClass::Integrable;
    else if (cls == "singular")
      spec.kind = KernelClass::SingularSymmetric;
    else
      r.fail({"kernel", "class"}, "expected integrable or singular");
    r.get(k, P, "delta", spec.delta);
    r.get(k, P, "s", spec.s);
    spec.normalizer = spec.delta > 0 && spec.s > 0 && spec.s < 1 ? default_normalizer(spec.kind, spec.delta, spec.s)
                                                                   : spec.normalizer;
    r.get(k, P, "normalizer", spec.normalizer);
    if (auto it = k.find("sigma"); it != k.end()) {
      const std::vector<std::string> S{"kernel", "sigma"};
      r.check_keys(*it, S, {"11", "12", "21", "22", "1I", "2I"});
      r.get(*it, S, "11", spec.sigma11);
      r.get(*it, S, "12", spec.sigma12);
      r.get(*it, S, "21", spec.sigma21);
      r.get(*it, S, "22", spec.sigma22);
      r.get(*it, S, "1I", spec.sigma1I);
      r.get(*it, S, "2I", spec.sigma2I);
    }
    if (auto it = k.find("quadrature"); it != k.end()) {
      const std::vector<std::string> Q{"kernel", "quadrature"};
      r.check_keys(*it, Q, {"pair_degree", "duffy_order", "single_degree"});
      auto& q = run.problem.quad;
      r.get(*it, Q, "pair_degree", q.pair_degree);
      r.get(*it, Q, "duffy_order", q.duffy_order);
      r.get(*it, Q, "single_degree", q.single_degree);
      if (q.pair_degree < 1 || q.single_degree < 1 || q.duffy_order < 1 || q.duffy_order > 24)
        r.fail(Q, "degrees must be positive and duffy_order <= 24");
    }
    try {
      spec.validate();
    } catch (const InputError& e) {
      r.fail(P, e.what());
    }
  }

  // [problem]
  {
    const json& p = table("problem");
    const std::vector<std::string> P{"problem"};
    r.check_keys(p, P, {"nu", "f1", "f2", "domain", "initial", "target", "data"});
    r.get(p, P, "nu", run.problem.nu);
    r.get(p, P, "f1", run.f1);
    r.get(p, P, "f2", run.f2);
    if (!(run.problem.nu >= 0)) r.fail({"problem", "nu"}, "must be >= 0");
    BoxMeshSpec box;
    if (auto it = p.find("domain"); it != p.end()) {
      const std::vector<std::string> D{"problem", "domain"};
      r.check_keys(*it, D, {"lower", "upper", "collar", "snap_fraction"});
      r.get(*it, D, "lower", box.lower);
      r.get(*it, D, "upper", box.upper);
      r.get(*it, D, "collar", box.collar);
      r.get(*it, D, "snap_fraction", box.snap_fraction);
      if (!(box.upper > box.lower) || !(box.collar > 0) || !(box.snap_fraction >= 0 && box.snap_fraction < 0.5))
        r.fail(D, "need upper > lower, collar > 0, 0 <= snap_fraction < 0.5");
    }
    run.initial.box = box;
    run.initial.shape = "square";
    run.initial.half_width = 4.0 / 30.0;
    run.target.box = box;
    run.target.box.cells_per_unit = 60;
    if (auto it = p.find("initial"); it != p.end()) read_mesh_source(r, *it, {"problem", "initial"}, run.initial, base_dir);
    if (auto it = p.find("target"); it != p.end()) read_mesh_source(r, *it, {"problem", "target"}, run.target, base_dir);
    std::string data;
    r.get(p, P, "data", data);
    if (!data.empty())
      run.data_path = std::filesystem::path(data).is_absolute() ? data : (std::filesystem::path(base_dir) / data).string();
  }

  // [optimizer]
  {
    const json& o = table("optimizer");
    const std::vector<std::string> P{"optimizer"};
    r.check_keys(o, P, {"epsilon", "maxiter", "tol", "max_halvings", "hessian_projection", "solver"});
    r.get(o, P, "epsilon", run.epsilon);
    r.get(o, P, "maxiter", run.maxiter);
    r.get(o, P, "tol", run.tol);
    r.get(o, P, "max_halvings", run.max_halvings);
    r.get(o, P, "hessian_projection", run.hessian_projection);
    if (auto it = o.find("solver"); it != o.end()) {
      const std::vector<std::string> S{"optimizer", "solver"};
      r.check_keys(*it, S, {"iterative", "residual_tol", "max_iterations"});
      r.get(*it, S, "iterative", run.solver.iterative);
      r.get(*it, S, "residual_tol", run.solver.residual_tol);
      r.get(*it, S, "max_iterations", run.solver.max_iterations);
      if (!(run.solver.residual_tol > 0) || run.solver.max_iterations < 1)
        r.fail(S, "residual_tol must be > 0 and max_iterations >= 1");
    }
  }

  // [output]
  {
    const json& o = table("output");
    const std::vector<std::string> P{"output"};
    r.check_keys(o, P, {"directory", "vtk"});
    r.get(o, P, "directory", run.output_dir);
    r.get(o, P, "vtk", run.write_vtk);
  }

  try {
    run.validate();
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), path, dir.empty() ? "." : dir.string());
}

}  // namespace nlshape
