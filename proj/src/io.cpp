#include "nlshape/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace nlshape {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw InputError("cannot create directory " + path + ": " + ec.message());
}

void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<PointData>& fields) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\nnlshape mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.vertices) out << p.x() << ' ' << p.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  out << "CELL_DATA " << mesh.num_triangles() << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (Region r : mesh.region) out << static_cast<int>(r) << '\n';
  if (!fields.empty()) out << "POINT_DATA " << mesh.num_nodes() << '\n';
  for (const auto& f : fields) {
    if (f.values->size() != mesh.num_nodes()) throw InputError("point field " + f.name + " has wrong size");
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) out << (*f.values)[i] << '\n';
  }
}

void write_history_csv(const std::string& path, const RunHistory& history) {
  auto out = open_out(path);
  out << "iter,J,defnorm_L2,walltime_s,mesh_file\n";
  for (const auto& r : history.records)
    out << r.iter << ',' << r.J << ',' << r.defnorm << ',' << r.walltime << ',' << r.mesh_file << '\n';
}

void write_triplets(const std::string& path, const SparseMatrix& A) {
  auto out = open_out(path);
  out << "row,col,value\n";
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
}

void save_target_data(const std::string& path, const TargetData& data) {
  const std::filesystem::path p(path);
  const std::string mesh_name = p.stem().string() + "_mesh.json";
  save_native(data.mesh, (p.parent_path() / mesh_name).string());
  nlohmann::json j;
  j["format"] = "nlshape-data";
  j["mesh"] = mesh_name;
  j["values"] = std::vector<double>(data.values.data(), data.values.data() + data.values.size());
  auto out = open_out(path);
  out << j.dump() << '\n';
}

TargetData load_target_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "nlshape-data") throw InputError(path + ": not an nlshape data file");
    TargetData d;
    const auto mesh_path = std::filesystem::path(path).parent_path() / j.at("mesh").get<std::string>();
    d.mesh = load_mesh(mesh_path.string(), MeshFormat::Native);
    const auto v = j.at("values").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != d.mesh.num_nodes())
      throw InputError(path + ": value count does not match the mesh");
    d.values = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace nlshape
