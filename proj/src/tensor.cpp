#include "biothom/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace biothom {

namespace {

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

double mandel_weight(int i, int j) { return i == j ? 1.0 : std::sqrt(2.0); }

}  // namespace

int mandel_size(int dim) { return dim * (dim + 1) / 2; }

std::pair<int, int> mandel_pair(int dim, int index) {
  static constexpr std::pair<int, int> pairs2[] = {{0, 0}, {1, 1}, {0, 1}};
  static constexpr std::pair<int, int> pairs3[] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  return dim == 2 ? pairs2[index] : pairs3[index];
}

Matrix unit_strain(int dim, int j, int k) {
  Matrix e = Matrix::Zero(dim, dim);
  e(j, k) += 0.5;
  e(k, j) += 0.5;
  return e;
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_spd(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  return min_eigenvalue(0.5 * (m + m.transpose())) > tol;
}

Tensor4::Tensor4(int dim) : dim_(dim) { check_dim(dim); }

Tensor4 Tensor4::isotropic(int dim, double lambda, double mu) {
  Tensor4 a(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l)
          a(i, j, k, l) = lambda * (i == j) * (k == l) + mu * ((i == k) * (j == l) + (i == l) * (j == k));
  return a;
}

Tensor4 Tensor4::from_mandel(const Matrix& mandel) {
  const int n = static_cast<int>(mandel.rows());
  const int dim = n == 3 ? 2 : n == 6 ? 3 : 0;
  check_dim(dim);
  Tensor4 a(dim);
  for (int I = 0; I < n; ++I) {
    const auto [i, j] = mandel_pair(dim, I);
    for (int J = 0; J < n; ++J) {
      const auto [k, l] = mandel_pair(dim, J);
      const double v = mandel(I, J) / (mandel_weight(i, j) * mandel_weight(k, l));
      a(i, j, k, l) = v;
      a(j, i, k, l) = v;
      a(i, j, l, k) = v;
      a(j, i, l, k) = v;
    }
  }
  return a;
}

Matrix Tensor4::to_mandel() const {
  const int n = mandel_size(dim_);
  Matrix m(n, n);
  for (int I = 0; I < n; ++I) {
    const auto [i, j] = mandel_pair(dim_, I);
    for (int J = 0; J < n; ++J) {
      const auto [k, l] = mandel_pair(dim_, J);
      m(I, J) = mandel_weight(i, j) * mandel_weight(k, l) * (*this)(i, j, k, l);
    }
  }
  return m;
}

Matrix Tensor4::contract(const Matrix& strain) const {
  Matrix s = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int l = 0; l < dim_; ++l) s(i, j) += (*this)(i, j, k, l) * strain(k, l);
  return s;
}

double Tensor4::minor_asymmetry() const {
  double dev = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int l = 0; l < dim_; ++l) {
          const double a = (*this)(i, j, k, l);
          dev = std::max({dev, std::abs(a - (*this)(j, i, k, l)), std::abs(a - (*this)(i, j, l, k))});
        }
  return dev;
}

double Tensor4::major_asymmetry() const {
  double dev = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k)
        for (int l = 0; l < dim_; ++l)
          dev = std::max(dev, std::abs((*this)(i, j, k, l) - (*this)(k, l, i, j)));
  return dev;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor4::max_abs_diff(const Tensor4& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("tensor dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - other.data_[i]));
  return m;
}

double Tensor4::coercivity() const {
  const Matrix m = to_mandel();
  return min_eigenvalue(0.5 * (m + m.transpose()));
}

}  // namespace biothom
