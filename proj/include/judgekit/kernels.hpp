#pragma once

#include <span>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference and, where
// the CPU supports it, an AVX2 variant picked once at startup. Elementwise
// kernels are bit-identical across variants; reductions (dot) agree to
// rounding only, because lane-wise accumulation reorders the sum.
namespace judgekit::kernels {

enum class Isa { Scalar, Avx2 };

/// Instruction set used by the dispatching entry points below. The
/// JUDGEKIT_SIMD environment variable ("scalar"/"avx2") overrides detection.
Isa active_isa();
std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);

/// Forces a variant for the rest of the process; returns the previous one.
/// Throws InputError if the CPU lacks the instruction set.
Isa set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out[i] = std[i] > 0 ? (x[i] - mean[i]) / std[i] : 0
void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out);

/// Variant-specific entry points, exposed for equivalence tests.
namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out);
}  // namespace avx2

}  // namespace judgekit::kernels
