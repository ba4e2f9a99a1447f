#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "tankseis/model.hpp"

namespace tankseis {

enum class BoundaryTag { free_surface, wall, base, axis };
enum class MeshGrading { uniform, surface_refined };

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::wall;
};

/// Meridional (r, z) section of the liquid discretized with bilinear quads;
/// the pressure field is p(r, z) cos(n theta) for harmonic n.
struct LiquidMesh {
  Eigen::Matrix<double, Eigen::Dynamic, 2> nodes;  // columns: r, z
  std::vector<std::array<int, 4>> elements;        // counterclockwise in (r, z)
  std::vector<BoundaryEdge> edges;
  int harmonic = 1;
  double radius = 0.0;
  double fill_height = 0.0;

  int node_count() const { return static_cast<int>(nodes.rows()); }
};

/// Throws std::invalid_argument when target_size <= 0 or exceeds min(R, H).
LiquidMesh build_mesh(const TankGeometry& geom, double target_size,
                      MeshGrading grading = MeshGrading::uniform, int harmonic = 1);

/// Same mesh with node k renamed to perm[k].
LiquidMesh renumber(const LiquidMesh& mesh, const std::vector<int>& perm);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Stiffness and mass operators on the free pressure DOFs.
struct SloshOperators {
  SparseMatrix K;
  SparseMatrix M;
  std::vector<int> node_dof;  // -1 for nodes held at p = 0 (axis, n >= 1)
  int harmonic = 1;
};

/// Weak form of the harmonic Laplacian with the linearized free-surface
/// condition p_tt + g p_z = 0; rigid wall and base are natural conditions.
/// Throws NumericError on a non-positive Jacobian.
SloshOperators assemble(const LiquidMesh& mesh, const Liquid& liquid, double g, bool compressible);

struct EigenOptions {
  double shift = 0.0;          // (rad/s)^2; negative regularization added when K is singular
  double tolerance = 1e-10;    // Ritz-pair convergence (relative)
  double residual_limit = 1e-8;
  int max_restarts = 6;        // Krylov dimension doubles on each restart
};

struct EigenSolution {
  Eigen::VectorXd eigenvalues;   // omega^2, ascending, positive
  Eigen::MatrixXd eigenvectors;  // nodal pressures, M-orthonormal, one column per mode
  Eigen::VectorXd residuals;     // ||K x - w2 M x|| / ||K x||
  int harmonic = 1;
  int lanczos_steps = 0;
  std::shared_ptr<const LiquidMesh> mesh;

  double period(int mode) const;
};

/// Smallest positive eigenpairs of K x = omega^2 M x by shift-invert Lanczos
/// with full reorthogonalization in the M inner product. Vectors are on the
/// reduced DOF set. Throws NumericError on factorization failure or
/// non-convergence.
EigenSolution solve_modes(const SparseMatrix& K, const SparseMatrix& M, int count,
                          const EigenOptions& opts = {});

/// Mesh, assembly and eigen-solution in one call; vectors expanded to nodes.
EigenSolution solve_sloshing(const TankGeometry& geom, const Liquid& liquid, double g, double size,
                             int harmonic, int count, bool compressible = false,
                             MeshGrading grading = MeshGrading::uniform, const EigenOptions& opts = {});

struct SurfacePoint {
  double r = 0.0;
  double eta = 0.0;
};

/// Free-surface elevation shape p(r, H)/(rho g) of one mode, ordered by r and
/// signed so the largest magnitude is positive.
std::vector<SurfacePoint> surface_elevation(const EigenSolution& sol, int mode, const Liquid& liquid, double g);

std::string mesh_nodes_csv(const LiquidMesh& mesh);
std::string mesh_elements_csv(const LiquidMesh& mesh);
std::string mode_csv(const EigenSolution& sol, int mode);

}  // namespace tankseis
