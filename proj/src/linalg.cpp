#include "procbox/linalg.hpp"

#include <stdexcept>

namespace procbox {

Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

Mat kron_all(const std::vector<Mat>& ms) {
  Mat r = Mat::Identity(1, 1);
  for (const auto& m : ms) r = kron(r, m);
  return r;
}

Mat ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = cplx(n(rng), n(rng)) / std::sqrt(2.0);
  return g;
}

Mat random_isometry(int rows, int cols, Rng& rng) {
  if (cols > rows) throw std::invalid_argument("random_isometry: cols > rows");
  Mat g = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  Mat r = qr.matrixQR();
  for (int j = 0; j < cols; ++j) {
    cplx d = r(j, j);
    double ad = std::abs(d);
    if (ad > 0) q.col(j) *= d / ad;
  }
  return q;
}

Mat random_unitary(int d, Rng& rng) { return random_isometry(d, d, rng); }

std::vector<Mat> random_kraus(int dim_out, int dim_in, int rank, Rng& rng) {
  Mat v = random_isometry(dim_out * rank, dim_in, rng);
  std::vector<Mat> ks;
  for (int e = 0; e < rank; ++e) ks.push_back(v.block(e * dim_out, 0, dim_out, dim_in));
  return ks;
}

Mat orth(const Mat& a, double tol) {
  if (a.cols() == 0 || a.rows() == 0) return Mat(a.rows(), 0);
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(1.0, smax)) ++r;
  return svd.matrixU().leftCols(r);
}

Mat complete_basis(const Mat& q, int n) {
  std::vector<Vec> cols;
  for (int j = 0; j < q.cols(); ++j) cols.push_back(q.col(j));
  for (int i = 0; i < n && (int)cols.size() < n; ++i) {
    Vec v = Vec::Zero(n);
    v(i) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) v -= c * c.dot(v);
    double nv = v.norm();
    if (nv > 1e-8) cols.push_back(v / nv);
  }
  Mat r(n, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) r.col(j) = cols[j];
  return r;
}

Mat pinv(const Mat& a, double tol) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  Eigen::VectorXd inv(s.size());
  for (int i = 0; i < s.size(); ++i) inv(i) = s(i) > tol * std::max(1.0, smax) ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

double trace_distance(const Mat& a, const Mat& b) {
  Mat d = a - b;
  Mat h = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double frob(const Mat& a) { return a.norm(); }

std::int64_t product(const std::vector<int>& dims) {
  std::int64_t p = 1;
  for (int d : dims) p *= d;
  return p;
}

std::vector<int> digits(std::int64_t idx, const std::vector<int>& dims) {
  std::vector<int> r(dims.size());
  for (int i = (int)dims.size() - 1; i >= 0; --i) {
    r[i] = (int)(idx % dims[i]);
    idx /= dims[i];
  }
  return r;
}

std::int64_t flat_index(const std::vector<int>& digs, const std::vector<int>& dims) {
  std::int64_t idx = 0;
  for (size_t i = 0; i < dims.size(); ++i) idx = idx * dims[i] + digs[i];
  return idx;
}

}  // namespace procbox
