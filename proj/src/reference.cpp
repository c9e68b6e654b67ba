#include "biothom/reference.hpp"

#include <stdexcept>

namespace biothom {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

struct Axis {
  Matrix mass;      // int N_a N_b
  Matrix stiff;     // int N_a' N_b'
  Matrix cross;     // int N_a N_b'
  Matrix integral;  // int N_a, as a column
};

Axis axis_matrices(int res, double h) {
  const int n = res + 1;
  Axis ax{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, 1)};
  for (int e = 0; e < res; ++e) {
    const int i = e;
    const int j = e + 1;
    ax.mass(i, i) += h / 3.0;
    ax.mass(j, j) += h / 3.0;
    ax.mass(i, j) += h / 6.0;
    ax.mass(j, i) += h / 6.0;
    ax.stiff(i, i) += 1.0 / h;
    ax.stiff(j, j) += 1.0 / h;
    ax.stiff(i, j) -= 1.0 / h;
    ax.stiff(j, i) -= 1.0 / h;
    ax.cross(i, i) -= 0.5;
    ax.cross(i, j) += 0.5;
    ax.cross(j, i) -= 0.5;
    ax.cross(j, j) += 0.5;
    ax.integral(i, 0) += 0.5 * h;
    ax.integral(j, 0) += 0.5 * h;
  }
  return ax;
}

class Assembler {
 public:
  explicit Assembler(const MacroDomain& domain) : dim_(domain.dim) {
    domain.validate();
    for (int a = 0; a < dim_; ++a) axes_.push_back(axis_matrices(domain.res[a], domain.extent[a] / domain.res[a]));
    nodes_ = 1;
    for (int a = 0; a < dim_; ++a) nodes_ *= domain.res[a] + 1;
    boundary_.assign(nodes_, false);
    for (int node = 0; node < nodes_; ++node) {
      int rem = node;
      for (int a = 0; a < dim_; ++a) {
        const int c = rem % (domain.res[a] + 1);
        rem /= domain.res[a] + 1;
        if (c == 0 || c == domain.res[a]) boundary_[node] = true;
      }
    }
  }

  int nodes() const { return nodes_; }
  bool boundary(int node) const { return boundary_[node]; }

  // Tensor product with `pick(axis)` selecting the factor on each axis.
  template <class Pick>
  Matrix product(Pick pick) const {
    Matrix m = pick(dim_ - 1);
    for (int a = dim_ - 2; a >= 0; --a) m = kron(m, pick(a));
    return m;
  }

  Matrix mass() const {
    return product([&](int a) { return axes_[a].mass; });
  }
  Vector integral() const {
    return product([&](int a) { return axes_[a].integral; }).col(0);
  }
  // int dN_a/dx_k dN_b/dx_l
  Matrix grad_grad(int k, int l) const {
    return product([&](int a) -> Matrix {
      if (a == k && a == l) return axes_[a].stiff;
      if (a == k) return axes_[a].cross.transpose();
      if (a == l) return axes_[a].cross;
      return axes_[a].mass;
    });
  }
  // int N_a dN_b/dx_k
  Matrix value_grad(int k) const {
    return product([&](int a) -> Matrix { return a == k ? axes_[a].cross : axes_[a].mass; });
  }

  Matrix diffusion(const Matrix& kappa) const {
    Matrix m = Matrix::Zero(nodes_, nodes_);
    for (int k = 0; k < dim_; ++k)
      for (int l = 0; l < dim_; ++l)
        if (kappa(k, l) != 0.0) m += kappa(k, l) * grad_grad(k, l);
    return m;
  }

 private:
  int dim_;
  int nodes_ = 0;
  std::vector<Axis> axes_;
  std::vector<bool> boundary_;
};

}  // namespace

ReferenceBiot reference_biot(const MacroDomain& domain, const EffectiveCoefficients& c, double dt, int steps) {
  const Assembler as(domain);
  const int d = domain.dim;
  const int n = as.nodes();
  // Block layout: displacement component i occupies rows i*n .. i*n+n-1, pressure follows.
  const int total = (d + 1) * n;
  std::vector<Matrix> gg(d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) gg[k * d + l] = as.grad_grad(k, l);
  std::vector<Matrix> vg(d);
  for (int k = 0; k < d; ++k) vg[k] = as.value_grad(k);
  const Matrix mass = as.mass();
  const Matrix lambda = 0.5 * (c.biot_strain + c.biot_strain.transpose());

  Matrix elastic = Matrix::Zero(d * n, d * n);
  Matrix coupling_up = Matrix::Zero(d * n, n);
  Matrix coupling_pu = Matrix::Zero(n, d * n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          if (c.stiffness(i, k, j, l) != 0.0) elastic.block(i * n, j * n, n, n) += c.stiffness(i, k, j, l) * gg[k * d + l];
    for (int k = 0; k < d; ++k) {
      coupling_up.block(i * n, 0, n, n) += c.biot_pressure(i, k) * vg[k];
      coupling_pu.block(0, i * n, n, n) += lambda(i, k) * vg[k];
    }
  }
  Matrix a = Matrix::Zero(total, total);
  a.topLeftCorner(d * n, d * n) = elastic;
  a.topRightCorner(d * n, n) = coupling_up;
  a.bottomLeftCorner(n, d * n) = coupling_pu / dt;
  a.bottomRightCorner(n, n) = (c.storage / dt) * mass + as.diffusion(c.permeability);

  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    for (int node = 0; node < n; ++node)
      if (!as.boundary(node)) keep.push_back(i * n + node);
  for (int node = 0; node < n; ++node)
    if (!as.boundary(node) || domain.pressure_bc == PressureBoundary::neumann_zero) keep.push_back(d * n + node);
  const int m = static_cast<int>(keep.size());
  Matrix reduced(m, m);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s) reduced(r, s) = a(keep[r], keep[s]);
  const Eigen::PartialPivLU<Matrix> lu(reduced);

  const Vector w = as.integral();
  Vector body = Vector::Zero(d * n);
  for (int i = 0; i < d; ++i) body.segment(i * n, n) = c.body_force[i] * w;

  ReferenceBiot out;
  Vector u = Vector::Zero(d * n);
  Vector p = Vector::Zero(n);
  auto store = [&] {
    Vector interleaved(d * n);
    for (int node = 0; node < n; ++node)
      for (int i = 0; i < d; ++i) interleaved[node * d + i] = u[i * n + node];
    out.u.push_back(interleaved);
    out.p.push_back(p);
  };
  store();
  for (int step = 1; step <= steps; ++step) {
    Vector rhs(total);
    rhs.head(d * n) = body;
    rhs.tail(n) = (c.storage / dt) * (mass * p) + (coupling_pu * u) / dt;
    Vector rr(m);
    for (int r = 0; r < m; ++r) rr[r] = rhs[keep[r]];
    const Vector x = lu.solve(rr);
    Vector full = Vector::Zero(total);
    for (int r = 0; r < m; ++r) full[keep[r]] = x[r];
    u = full.head(d * n);
    p = full.tail(n);
    store();
  }
  return out;
}

std::vector<Vector> reference_exchange_diffusion(const MacroDomain& domain, double storage, const Matrix& permeability,
                                                 double exchange, const std::vector<double>& eta, double source,
                                                 double dt, int steps) {
  if (static_cast<int>(eta.size()) < steps + 1) throw std::invalid_argument("kernel shorter than the run");
  const Assembler as(domain);
  const int n = as.nodes();
  const Matrix mass = as.mass();
  const double eta1 = steps >= 1 ? eta[1] : 0.0;
  const Matrix a = (storage / dt + exchange - eta1) * mass + as.diffusion(permeability);
  std::vector<int> keep;
  for (int node = 0; node < n; ++node)
    if (!as.boundary(node) || domain.pressure_bc == PressureBoundary::neumann_zero) keep.push_back(node);
  const int m = static_cast<int>(keep.size());
  Matrix reduced(m, m);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s) reduced(r, s) = a(keep[r], keep[s]);
  const Eigen::PartialPivLU<Matrix> lu(reduced);
  const Vector load = source * as.integral();

  std::vector<Vector> p{Vector::Zero(n)};
  for (int step = 1; step <= steps; ++step) {
    Vector memory = Vector::Zero(n);
    for (int k = 1; k < step; ++k) memory += eta[step - k + 1] * p[k];
    const Vector rhs = (storage / dt) * (mass * p.back()) + mass * memory + load;
    Vector rr(m);
    for (int r = 0; r < m; ++r) rr[r] = rhs[keep[r]];
    const Vector x = lu.solve(rr);
    Vector next = Vector::Zero(n);
    for (int r = 0; r < m; ++r) next[keep[r]] = x[r];
    p.push_back(next);
  }
  return p;
}

}  // namespace biothom
