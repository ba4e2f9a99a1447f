#include "tankseis/sloshfem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tankseis/config.hpp"

namespace tankseis {

namespace {

std::vector<double> spaced(double a, double b, int n) {
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) x[static_cast<std::size_t>(k)] = a + (b - a) * k / n;
  x.back() = b;
  return x;
}

int divisions(double length, double size) {
  return std::max(1, static_cast<int>(std::ceil(length / size - 1e-9)));
}

}  // namespace

LiquidMesh build_mesh(const TankGeometry& geom, double target_size, MeshGrading grading, int harmonic) {
  const double R = geom.radius, H = geom.fill_height;
  if (!(target_size > 0.0)) throw std::invalid_argument("build_mesh: target size must be positive");
  if (target_size > std::min(R, H)) throw std::invalid_argument("build_mesh: target size exceeds min(R, H)");
  if (harmonic < 0) throw std::invalid_argument("build_mesh: harmonic must be >= 0");

  const std::vector<double> rs = spaced(0.0, R, divisions(R, target_size));
  std::vector<double> zs;
  if (grading == MeshGrading::uniform) {
    zs = spaced(0.0, H, divisions(H, target_size));
  } else {
    const double zb = 0.8 * H;
    zs = spaced(0.0, zb, divisions(zb, target_size));
    const auto top = spaced(zb, H, divisions(H - zb, 0.5 * target_size));
    zs.insert(zs.end(), top.begin() + 1, top.end());
  }

  LiquidMesh mesh;
  mesh.harmonic = harmonic;
  mesh.radius = R;
  mesh.fill_height = H;
  const int nr = static_cast<int>(rs.size()), nz = static_cast<int>(zs.size());
  mesh.nodes.resize(nr * nz, 2);
  auto id = [nr](int i, int j) { return j * nr + i; };
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < nr; ++i) {
      mesh.nodes(id(i, j), 0) = rs[static_cast<std::size_t>(i)];
      mesh.nodes(id(i, j), 1) = zs[static_cast<std::size_t>(j)];
    }
  for (int j = 0; j + 1 < nz; ++j)
    for (int i = 0; i + 1 < nr; ++i)
      mesh.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  for (int i = 0; i + 1 < nr; ++i) {
    mesh.edges.push_back({id(i, nz - 1), id(i + 1, nz - 1), BoundaryTag::free_surface});
    mesh.edges.push_back({id(i, 0), id(i + 1, 0), BoundaryTag::base});
  }
  for (int j = 0; j + 1 < nz; ++j) {
    mesh.edges.push_back({id(nr - 1, j), id(nr - 1, j + 1), BoundaryTag::wall});
    mesh.edges.push_back({id(0, j), id(0, j + 1), BoundaryTag::axis});
  }
  return mesh;
}

LiquidMesh renumber(const LiquidMesh& mesh, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != mesh.node_count()) throw std::invalid_argument("renumber: bad permutation");
  LiquidMesh out = mesh;
  for (int k = 0; k < mesh.node_count(); ++k) out.nodes.row(perm[static_cast<std::size_t>(k)]) = mesh.nodes.row(k);
  for (auto& e : out.elements)
    for (auto& n : e) n = perm[static_cast<std::size_t>(n)];
  for (auto& e : out.edges) {
    e.a = perm[static_cast<std::size_t>(e.a)];
    e.b = perm[static_cast<std::size_t>(e.b)];
  }
  return out;
}

SloshOperators assemble(const LiquidMesh& mesh, const Liquid& liquid, double g, bool compressible) {
  SloshOperators ops;
  ops.harmonic = mesh.harmonic;
  const int nn = mesh.node_count();
  const double n2 = static_cast<double>(mesh.harmonic) * mesh.harmonic;
  const double axis_tol = 1e-12 * mesh.radius;

  ops.node_dof.assign(static_cast<std::size_t>(nn), -1);
  int ndof = 0;
  for (int k = 0; k < nn; ++k)
    if (mesh.harmonic == 0 || mesh.nodes(k, 0) > axis_tol) ops.node_dof[static_cast<std::size_t>(k)] = ndof++;

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> kt, mt;
  kt.reserve(mesh.elements.size() * 16);
  const double inv_c2 = compressible ? 1.0 / (liquid.bulk_modulus / liquid.density) : 0.0;
  if (compressible) mt.reserve(mesh.elements.size() * 16);

  const double gp = 1.0 / std::sqrt(3.0);
  const double xi[4] = {-gp, gp, gp, -gp};
  const double eta[4] = {-gp, -gp, gp, gp};
  const double sx[4] = {-1, 1, 1, -1};
  const double sy[4] = {-1, -1, 1, 1};

  for (const auto& el : mesh.elements) {
    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 2> x;
    for (int a = 0; a < 4; ++a) x.row(a) = mesh.nodes.row(el[static_cast<std::size_t>(a)]);
    for (int q = 0; q < 4; ++q) {
      Eigen::Vector4d N;
      Eigen::Matrix<double, 2, 4> dN;  // d/dxi, d/deta
      for (int a = 0; a < 4; ++a) {
        N[a] = 0.25 * (1 + sx[a] * xi[q]) * (1 + sy[a] * eta[q]);
        dN(0, a) = 0.25 * sx[a] * (1 + sy[a] * eta[q]);
        dN(1, a) = 0.25 * sy[a] * (1 + sx[a] * xi[q]);
      }
      const Eigen::Matrix2d J = dN * x;
      const double det = J.determinant();
      if (!(det > 0.0)) throw NumericError("assemble: element with non-positive Jacobian");
      const Eigen::Matrix<double, 2, 4> B = J.inverse() * dN;
      const double r = N.dot(x.col(0));
      const double w = r * det;
      ke.noalias() += w * (B.transpose() * B);
      if (n2 > 0.0) ke.noalias() += (w * n2 / (r * r)) * (N * N.transpose());
      if (compressible) me.noalias() += (w * inv_c2) * (N * N.transpose());
    }
    for (int a = 0; a < 4; ++a) {
      const int da = ops.node_dof[static_cast<std::size_t>(el[static_cast<std::size_t>(a)])];
      if (da < 0) continue;
      for (int b = 0; b < 4; ++b) {
        const int db = ops.node_dof[static_cast<std::size_t>(el[static_cast<std::size_t>(b)])];
        if (db < 0) continue;
        kt.emplace_back(da, db, ke(a, b));
        if (compressible) mt.emplace_back(da, db, me(a, b));
      }
    }
  }

  // free-surface term (1/g) int p p' r dr, two-point Gauss per edge
  const double s[2] = {0.5 - 0.5 * gp, 0.5 + 0.5 * gp};
  for (const auto& e : mesh.edges) {
    if (e.tag != BoundaryTag::free_surface) continue;
    const double ra = mesh.nodes(e.a, 0), rb = mesh.nodes(e.b, 0);
    const double len = (mesh.nodes.row(e.b) - mesh.nodes.row(e.a)).norm();
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    for (double t : s) {
      const Eigen::Vector2d N(1.0 - t, t);
      const double r = (1.0 - t) * ra + t * rb;
      m.noalias() += (0.5 * len * r / g) * (N * N.transpose());
    }
    const int d[2] = {ops.node_dof[static_cast<std::size_t>(e.a)], ops.node_dof[static_cast<std::size_t>(e.b)]};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (d[a] >= 0 && d[b] >= 0) mt.emplace_back(d[a], d[b], m(a, b));
  }

  ops.K.resize(ndof, ndof);
  ops.M.resize(ndof, ndof);
  ops.K.setFromTriplets(kt.begin(), kt.end());
  ops.M.setFromTriplets(mt.begin(), mt.end());
  return ops;
}

double EigenSolution::period(int mode) const {
  return 2.0 * std::numbers::pi / std::sqrt(eigenvalues[mode]);
}

namespace {

using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

bool factor_ok(const Factor& f) {
  if (f.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = f.vectorD();
  const double big = d.cwiseAbs().maxCoeff();
  return d.size() == 0 || d.cwiseAbs().minCoeff() > 1e-12 * big;
}

struct LanczosResult {
  Eigen::VectorXd values;   // omega^2 ascending
  Eigen::MatrixXd vectors;  // full DOF set
  bool converged = false;
  int steps = 0;
};

// M is only semidefinite when the liquid is incompressible (free-surface
// mass), and a Krylov recurrence over the full DOF set then picks up
// null-space roundoff. The iteration runs on the mass-carrying DOFs `sel`
// instead, where op = [(K - sigma M)^-1 M]_sel,sel is symmetric in the
// positive definite M_sel,sel inner product.
class RestrictedOp {
 public:
  RestrictedOp(const SparseMatrix& M, const Factor& F, std::vector<Eigen::Index> sel)
      : M_(M), F_(F), sel_(std::move(sel)) {
    std::vector<Eigen::Triplet<double>> t;
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(M.rows()), -1);
    for (std::size_t i = 0; i < sel_.size(); ++i) pos[static_cast<std::size_t>(sel_[i])] = static_cast<Eigen::Index>(i);
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
        const Eigen::Index r = pos[static_cast<std::size_t>(it.row())], c = pos[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    Mss_.resize(size(), size());
    Mss_.setFromTriplets(t.begin(), t.end());
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(sel_.size()); }
  const SparseMatrix& mass() const { return Mss_; }
  const SparseMatrix& full_mass() const { return M_; }

  // (K - sigma M)^-1 M applied to the embedded vector, full length
  Eigen::VectorXd full(const Eigen::VectorXd& y) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(M_.rows());
    for (Eigen::Index i = 0; i < size(); ++i) z[sel_[static_cast<std::size_t>(i)]] = y[i];
    return F_.solve(M_ * z);
  }
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const { return restrict(full(y)); }
  Eigen::VectorXd restrict(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(size());
    for (Eigen::Index i = 0; i < size(); ++i) y[i] = x[sel_[static_cast<std::size_t>(i)]];
    return y;
  }

 private:
  const SparseMatrix& M_;
  const Factor& F_;
  std::vector<Eigen::Index> sel_;
  SparseMatrix Mss_;
};

LanczosResult lanczos(const RestrictedOp& op, double sigma, double discard_below, int count, int steps,
                      double tol) {
  const Eigen::Index n = op.size();
  const SparseMatrix& M = op.mass();
  LanczosResult res;
  Eigen::MatrixXd V(n, steps + 1), MV(n, steps + 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(steps), beta = Eigen::VectorXd::Zero(steps);

  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
  w = op.apply(w);
  Eigen::VectorXd mw = M * w;
  double nrm = std::sqrt(std::max(w.dot(mw), 0.0));
  if (!(nrm > 0.0)) throw NumericError("solve_modes: starting vector has no mass component");
  V.col(0) = w / nrm;
  MV.col(0) = mw / nrm;

  int m = steps;
  double alpha_max = 0.0;
  for (int j = 0; j < steps; ++j) {
    w = op.apply(V.col(j));
    mw = M * w;
    alpha[j] = MV.col(j).dot(w);
    alpha_max = std::max(alpha_max, std::abs(alpha[j]));
    // full reorthogonalization, two passes of classical Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = MV.leftCols(j + 1).transpose() * w;
      w.noalias() -= V.leftCols(j + 1) * c;
      mw.noalias() -= MV.leftCols(j + 1) * c;
    }
    const double b = std::sqrt(std::max(w.dot(mw), 0.0));
    beta[j] = b;
    if (b <= 1e-12 * alpha_max || j + 1 == n) {
      beta[j] = 0.0;
      m = j + 1;
      break;
    }
    V.col(j + 1) = w / b;
    MV.col(j + 1) = mw / b;
  }
  res.steps = m;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const Eigen::VectorXd theta = es.eigenvalues();  // ascending; we want the largest
  std::vector<int> wanted;
  for (int k = m - 1; k >= 0 && static_cast<int>(wanted.size()) < count; --k) {
    if (!(theta[k] > 0.0)) break;
    const double w2 = sigma + 1.0 / theta[k];
    if (w2 <= discard_below) continue;
    wanted.push_back(k);
  }
  if (static_cast<int>(wanted.size()) < count) return res;
  res.converged = true;
  const double last_beta = beta[m - 1];
  for (int k : wanted) {
    const double est = std::abs(last_beta * es.eigenvectors()(m - 1, k));
    if (est > tol * std::abs(theta[k])) res.converged = false;
  }
  res.values.resize(count);
  for (int i = 0; i < count; ++i) {
    const int k = wanted[static_cast<std::size_t>(i)];
    res.values[i] = sigma + 1.0 / theta[k];
    // lift to the full DOF set: x = op(y) / theta
    Eigen::VectorXd x = op.full(V.leftCols(m) * es.eigenvectors().col(k).head(m)) / theta[k];
    x /= std::sqrt(x.dot(op.full_mass() * x));
    // deterministic sign: largest-magnitude entry positive
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    if (x[imax] < 0.0) x = -x;
    if (i == 0) res.vectors.resize(x.size(), count);
    res.vectors.col(i) = x;
  }
  return res;
}

}  // namespace

EigenSolution solve_modes(const SparseMatrix& K, const SparseMatrix& M, int count, const EigenOptions& opts) {
  if (count < 1) throw std::invalid_argument("solve_modes: count must be >= 1");
  const Eigen::Index n = K.rows();
  if (n == 0 || M.rows() != n) throw std::invalid_argument("solve_modes: operator size mismatch");

  double sigma = opts.shift;
  Factor F;
  F.compute(K - sigma * M);
  double discard_below = 0.0;
  if (!factor_ok(F)) {
    // singular K (e.g. the constant pressure mode for n = 0): move the shift
    // slightly below zero and drop the zero eigenvalue afterwards
    const double scale = K.diagonal().cwiseAbs().maxCoeff() / std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    const double delta = 1e-4 * scale;
    sigma -= delta;
    F.compute(K - sigma * M);
    if (!factor_ok(F)) throw NumericError("solve_modes: factorization of K - sigma M failed");
    discard_below = 1e-6 * delta;
  }

  std::vector<Eigen::Index> sel;
  for (Eigen::Index i = 0; i < n; ++i)
    if (M.coeff(i, i) != 0.0) sel.push_back(i);
  if (static_cast<int>(sel.size()) < count) throw NumericError("solve_modes: fewer mass-carrying DOFs than requested modes");
  const RestrictedOp op(M, F, std::move(sel));
  const Eigen::Index dim = op.size();

  const int want = count;
  int steps = static_cast<int>(std::min<Eigen::Index>(dim, std::max(2 * want + 20, 40)));
  LanczosResult lr;
  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    lr = lanczos(op, sigma, discard_below, want, steps, opts.tolerance);
    if (lr.converged) break;
    if (steps >= dim) break;
    steps = static_cast<int>(std::min<Eigen::Index>(dim, 2 * steps));
  }
  if (!lr.converged) throw NumericError("solve_modes: Lanczos iteration did not converge");

  EigenSolution sol;
  sol.eigenvalues = lr.values;
  sol.eigenvectors = lr.vectors;
  sol.lanczos_steps = lr.steps;
  sol.residuals.resize(count);
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd x = lr.vectors.col(i);
    const Eigen::VectorXd kx = K * x;
    sol.residuals[i] = (kx - lr.values[i] * (M * x)).norm() / kx.norm();
    if (!(sol.residuals[i] < opts.residual_limit))
      throw NumericError("solve_modes: residual " + std::to_string(sol.residuals[i]) + " above limit for mode " +
                         std::to_string(i + 1));
  }
  return sol;
}

EigenSolution solve_sloshing(const TankGeometry& geom, const Liquid& liquid, double g, double size, int harmonic,
                             int count, bool compressible, MeshGrading grading, const EigenOptions& opts) {
  auto mesh = std::make_shared<LiquidMesh>(build_mesh(geom, size, grading, harmonic));
  const SloshOperators ops = assemble(*mesh, liquid, g, compressible);
  EigenSolution sol = solve_modes(ops.K, ops.M, count, opts);
  Eigen::MatrixXd nodal = Eigen::MatrixXd::Zero(mesh->node_count(), count);
  for (int k = 0; k < mesh->node_count(); ++k) {
    const int d = ops.node_dof[static_cast<std::size_t>(k)];
    if (d >= 0) nodal.row(k) = sol.eigenvectors.row(d);
  }
  sol.eigenvectors = std::move(nodal);
  sol.harmonic = harmonic;
  sol.mesh = std::move(mesh);
  return sol;
}

std::vector<SurfacePoint> surface_elevation(const EigenSolution& sol, int mode, const Liquid& liquid, double g) {
  if (!sol.mesh) throw std::invalid_argument("surface_elevation: solution carries no mesh");
  if (mode < 0 || mode >= sol.eigenvectors.cols()) throw std::out_of_range("surface_elevation: mode index");
  const auto& mesh = *sol.mesh;
  if (sol.eigenvectors.rows() != mesh.node_count())
    throw std::invalid_argument("surface_elevation: eigenvectors are not nodal");
  std::vector<int> surface;
  for (const auto& e : mesh.edges)
    if (e.tag == BoundaryTag::free_surface) {
      surface.push_back(e.a);
      surface.push_back(e.b);
    }
  std::sort(surface.begin(), surface.end());
  surface.erase(std::unique(surface.begin(), surface.end()), surface.end());
  std::vector<SurfacePoint> out;
  for (int k : surface) out.push_back({mesh.nodes(k, 0), sol.eigenvectors(k, mode) / (liquid.density * g)});
  std::sort(out.begin(), out.end(), [](const SurfacePoint& a, const SurfacePoint& b) { return a.r < b.r; });
  double big = 0.0;
  for (const auto& p : out)
    if (std::abs(p.eta) > std::abs(big)) big = p.eta;
  if (big < 0.0)
    for (auto& p : out) p.eta = -p.eta;
  return out;
}

std::string mesh_nodes_csv(const LiquidMesh& mesh) {
  std::ostringstream out;
  out << "node,r,z\n";
  for (int k = 0; k < mesh.node_count(); ++k)
    out << k << ',' << format_double(mesh.nodes(k, 0)) << ',' << format_double(mesh.nodes(k, 1)) << '\n';
  return out.str();
}

std::string mesh_elements_csv(const LiquidMesh& mesh) {
  std::ostringstream out;
  out << "element,n0,n1,n2,n3\n";
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) {
    const auto& e = mesh.elements[k];
    out << k << ',' << e[0] << ',' << e[1] << ',' << e[2] << ',' << e[3] << '\n';
  }
  return out.str();
}

std::string mode_csv(const EigenSolution& sol, int mode) {
  if (!sol.mesh) throw std::invalid_argument("mode_csv: solution carries no mesh");
  if (mode < 0 || mode >= sol.eigenvectors.cols()) throw std::out_of_range("mode_csv: mode index");
  std::ostringstream out;
  out << "r,z,p\n";
  const auto& mesh = *sol.mesh;
  for (int k = 0; k < mesh.node_count(); ++k)
    out << format_double(mesh.nodes(k, 0)) << ',' << format_double(mesh.nodes(k, 1)) << ','
        << format_double(sol.eigenvectors(k, mode)) << '\n';
  return out.str();
}

}  // namespace tankseis
