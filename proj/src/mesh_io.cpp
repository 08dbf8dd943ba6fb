#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "nlshape/mesh.hpp"

namespace nlshape {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Region default_region(const std::string& key) {
  if (key == "1" || key == "Omega1" || key == "omega1") return Region::Omega1;
  if (key == "2" || key == "Omega2" || key == "omega2") return Region::Omega2;
  if (key == "3" || key == "Interaction" || key == "interaction" || key == "I")
    return Region::Interaction;
  throw InputError("unknown region tag '" + key + "'");
}

Region lookup(const RegionMap& regions, const std::string& tag, const std::string& name) {
  if (regions.empty()) return name.empty() ? default_region(tag) : default_region(name);
  if (auto it = regions.find(tag); it != regions.end()) return it->second;
  if (!name.empty())
    if (auto it = regions.find(name); it != regions.end()) return it->second;
  throw InputError("unknown region tag '" + tag + (name.empty() ? "" : "' (" + name + ")") + "'");
}

}  // namespace

Mesh parse_gmsh(const std::string& text, const RegionMap& regions) {
  std::istringstream in(text);
  std::string line;
  std::unordered_map<long, int> node_index;
  std::unordered_map<long, std::string> physical_names;
  Mesh mesh;
  std::vector<long> tri_tags;
  bool have_format = false, have_nodes = false, have_elements = false;
  auto expect_end = [&](const std::string& tag) {
    std::string l;
    while (std::getline(in, l))
      if (l.rfind(tag, 0) == 0) return;
    throw InputError("gmsh: missing " + tag);
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "$MeshFormat") {
      std::getline(in, line);
      std::istringstream ls(line);
      double version;
      int file_type, data_size;
      if (!(ls >> version >> file_type >> data_size)) throw InputError("gmsh: malformed $MeshFormat");
      if (version < 2.0 || version >= 3.0) throw InputError("gmsh: only MSH 2.x is supported");
      if (file_type != 0) throw InputError("gmsh: only ASCII files are supported");
      have_format = true;
      expect_end("$EndMeshFormat");
    } else if (line == "$PhysicalNames") {
      int n;
      if (!(in >> n)) throw InputError("gmsh: malformed $PhysicalNames");
      for (int k = 0; k < n; ++k) {
        int dim;
        long tag;
        std::string name;
        if (!(in >> dim >> tag)) throw InputError("gmsh: malformed physical name entry");
        std::getline(in, name);
        const auto q0 = name.find('"'), q1 = name.rfind('"');
        if (q0 == std::string::npos || q1 == q0) throw InputError("gmsh: physical name must be quoted");
        physical_names[tag] = name.substr(q0 + 1, q1 - q0 - 1);
      }
      expect_end("$EndPhysicalNames");
    } else if (line == "$Nodes") {
      long n;
      if (!(in >> n) || n < 0) throw InputError("gmsh: malformed $Nodes");
      mesh.vertices.reserve(n);
      for (long k = 0; k < n; ++k) {
        long id;
        double x, y, z;
        if (!(in >> id >> x >> y >> z)) throw InputError("gmsh: malformed node record " + std::to_string(k));
        node_index[id] = static_cast<int>(mesh.vertices.size());
        mesh.vertices.emplace_back(x, y);
      }
      have_nodes = true;
      expect_end("$EndNodes");
    } else if (line == "$Elements") {
      long n;
      if (!(in >> n) || n < 0) throw InputError("gmsh: malformed $Elements");
      std::getline(in, line);
      for (long k = 0; k < n; ++k) {
        if (!std::getline(in, line)) throw InputError("gmsh: truncated $Elements");
        std::istringstream ls(line);
        long id, type, ntags;
        if (!(ls >> id >> type >> ntags)) throw InputError("gmsh: malformed element record");
        std::vector<long> tags(ntags);
        for (auto& t : tags)
          if (!(ls >> t)) throw InputError("gmsh: malformed element tags");
        if (type != 2) continue;  // only 3-node triangles carry regions
        if (ntags < 1) throw InputError("gmsh: triangle without physical tag");
        std::array<int, 3> T;
        for (int j = 0; j < 3; ++j) {
          long v;
          if (!(ls >> v)) throw InputError("gmsh: malformed triangle connectivity");
          auto it = node_index.find(v);
          if (it == node_index.end()) throw InputError("gmsh: element references unknown node " + std::to_string(v));
          T[j] = it->second;
        }
        mesh.triangles.push_back(T);
        tri_tags.push_back(tags[0]);
      }
      have_elements = true;
      expect_end("$EndElements");
    }
  }
  if (!have_format || !have_nodes || !have_elements) throw InputError("gmsh: missing required section");
  for (long tag : tri_tags) {
    auto it = physical_names.find(tag);
    mesh.region.push_back(lookup(regions, std::to_string(tag), it == physical_names.end() ? "" : it->second));
  }
  finalize_mesh(mesh);
  return mesh;
}

Mesh parse_native(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("native mesh: ") + e.what());
  }
  Mesh mesh;
  try {
    for (const auto& v : j.at("vertices")) mesh.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    for (const auto& t : j.at("triangles")) mesh.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    for (const auto& l : j.at("labels")) {
      const std::string key = l.is_string() ? l.get<std::string>() : std::to_string(l.get<int>());
      mesh.region.push_back(default_region(key));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("native mesh: ") + e.what());
  }
  finalize_mesh(mesh);
  return mesh;
}

std::string to_native(const Mesh& mesh) {
  nlohmann::json j;
  j["format"] = "nlshape-mesh";
  auto& V = j["vertices"] = nlohmann::json::array();
  for (const auto& p : mesh.vertices) V.push_back({p.x(), p.y()});
  auto& T = j["triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.triangles) T.push_back({t[0], t[1], t[2]});
  auto& L = j["labels"] = nlohmann::json::array();
  for (Region r : mesh.region) L.push_back(region_name(r));
  return j.dump();
}

void save_native(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << to_native(mesh) << "\n";
}

Mesh load_mesh(const std::string& path, MeshFormat format, const RegionMap& regions) {
  const std::string text = read_file(path);
  return format == MeshFormat::Gmsh ? parse_gmsh(text, regions) : parse_native(text);
}

}  // namespace nlshape
