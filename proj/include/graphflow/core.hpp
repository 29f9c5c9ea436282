/* Shared small-matrix aliases, error types, and the deterministic worker pool.
 *
 * All per-node linear algebra runs on stack-capacity Eigen matrices
 * (dimensions are runtime, capacity is kMaxDim) so the hot loops never
 * touch the heap.
 */
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphflow {

// Factor dimensions supported per factor; the product chart has at most 2*kMaxDim.
inline constexpr int kMaxDim = 4;

using Mat  = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec  = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using PMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim, 2 * kMaxDim>;
using PVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;

// Rank-3 object T[k](i,j), used for metric derivatives and Christoffels.
struct Ten3 {
  std::array<Mat, kMaxDim> s{};
  int dim = 0;
  void resize(int d, int r, int c) {
    dim = d;
    for (int k = 0; k < d; ++k) s[k] = Mat::Zero(r, c);
  }
  Mat& operator[](int k) { return s[k]; }
  const Mat& operator[](int k) const { return s[k]; }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotSpacelikeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidFrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VersionError : FormatError {
  using FormatError::FormatError;
};

// Worker count: min(GRAPHFLOW_THREADS, hardware). Always >= 1.
int worker_count();

// Runs fn(begin, end) over [0, n) in fixed-size blocks distributed over the
// worker pool. Block boundaries are independent of the worker count, so any
// reduction that combines per-block partials in block order is bitwise
// deterministic regardless of GRAPHFLOW_THREADS.
void parallel_blocks(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

inline constexpr std::int64_t kBlockSize = 2048;
inline std::int64_t block_count(std::int64_t n) { return (n + kBlockSize - 1) / kBlockSize; }

// Deterministic max-reduction over nodes: evaluates value(i) for each index,
// reduces per block, then combines blocks in order.
double block_max(std::int64_t n, const std::function<double(std::int64_t)>& value);
double block_min(std::int64_t n, const std::function<double(std::int64_t)>& value);
double block_sum(std::int64_t n, const std::function<double(std::int64_t)>& value);

}  // namespace graphflow
