#pragma once

#include <string>
#include <vector>

#include "nlshape/optimizer.hpp"

namespace nlshape {

struct PointData {
  std::string name;
  const Eigen::VectorXd* values;
};
// VTK legacy ASCII unstructured grid with scalar point data and a region cell field.
void write_vtk(const std::string& path, const Mesh& mesh, const std::vector<PointData>& fields);

// iter,J,defnorm_L2,walltime_s,mesh_file
void write_history_csv(const std::string& path, const RunHistory& history);

// row,col,value for every stored entry
void write_triplets(const std::string& path, const SparseMatrix& A);

// JSON: {"format", "mesh" (file name next to the data file), "values"}
void save_target_data(const std::string& path, const TargetData& data);
TargetData load_target_data(const std::string& path);

// Creates the directory (and parents) if needed.
void ensure_directory(const std::string& path);

}  // namespace nlshape
