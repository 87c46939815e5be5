#include "kgrl/autodiff/init.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgrl::autodiff {

template <typename T>
std::vector<T> orthogonal_init(std::size_t rows, std::size_t cols, double gain,
                               std::mt19937_64& rng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("orthogonal_init: empty matrix");
  const std::size_t tall = std::max(rows, cols);
  const std::size_t wide = std::min(rows, cols);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd gaussian(tall, wide);
  // Fill in a fixed order so results do not depend on Eigen's storage order.
  for (std::size_t r = 0; r < tall; ++r) {
    for (std::size_t c = 0; c < wide; ++c) gaussian(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (std::size_t c = 0; c < wide; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  std::vector<T> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = rows >= cols ? q(i, j) : q(j, i);
      out[i * cols + j] = static_cast<T>(gain * v);
    }
  }
  return out;
}

template <typename T>
double orthogonality_defect(const std::vector<T>& matrix, std::size_t rows, std::size_t cols,
                            double gain) {
  if (matrix.size() != rows * cols) throw std::invalid_argument("orthogonality_defect: size mismatch");
  const bool by_columns = rows >= cols;
  const std::size_t n = by_columns ? cols : rows;
  const std::size_t len = by_columns ? rows : cols;
  auto at = [&](std::size_t vec, std::size_t k) {
    const T v = by_columns ? matrix[k * cols + vec] : matrix[vec * cols + k];
    return static_cast<double>(v) / gain;
  };
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += at(a, k) * at(b, k);
      worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  }
  return worst;
}

template std::vector<float> orthogonal_init(std::size_t, std::size_t, double, std::mt19937_64&);
template std::vector<double> orthogonal_init(std::size_t, std::size_t, double, std::mt19937_64&);
template double orthogonality_defect(const std::vector<float>&, std::size_t, std::size_t, double);
template double orthogonality_defect(const std::vector<double>&, std::size_t, std::size_t, double);

}  // namespace kgrl::autodiff
