#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace kgrl::autodiff {

// Row-major rows x cols matrix with orthonormal columns (rows >= cols) or
// orthonormal rows (rows < cols), scaled by gain. Drawn as the Q factor of a
// Gaussian matrix with the sign convention Q * sign(diag(R)), so the result
// is Haar-distributed.
template <typename T>
std::vector<T> orthogonal_init(std::size_t rows, std::size_t cols, double gain,
                               std::mt19937_64& rng);

// Largest |entry| of M^T M - I (or M M^T - I when rows < cols) for a
// row-major matrix scaled by 1/gain.
template <typename T>
double orthogonality_defect(const std::vector<T>& matrix, std::size_t rows, std::size_t cols,
                            double gain = 1.0);

}  // namespace kgrl::autodiff
