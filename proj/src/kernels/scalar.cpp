#include "judgekit/kernels.hpp"

namespace judgekit::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std_dev[i] > 0.0 ? (x[i] - mean[i]) / std_dev[i] : 0.0;
}

}  // namespace judgekit::kernels::scalar
