// Copyright 2026 The trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRAJCAST__SRC__KERNELS_HPP_
#define TRAJCAST__SRC__KERNELS_HPP_

#include <cstddef>

// Row-major dense kernels. Every routine accumulates into C (C += ...). The matrix
// products are backed by Eigen.
namespace trajcast::kernels
{

double dot(const double * a, const double * b, std::size_t n);
void axpy(double alpha, const double * x, double * y, std::size_t n);

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double * a, const double * b, double * c);
// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double * a, const double * b, double * c);
// C[m x n] += A[k x m]^T * B[k x n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double * a, const double * b, double * c);

}  // namespace trajcast::kernels

#endif  // TRAJCAST__SRC__KERNELS_HPP_
