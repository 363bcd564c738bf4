#include <atomic>
#include <cstdlib>
#include <string>

#include "judgekit/error.hpp"
#include "judgekit/kernels.hpp"

namespace judgekit::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(JUDGEKIT_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("JUDGEKIT_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && cpu_has_avx2()) return Isa::Avx2;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa set_isa(Isa isa) {
  if (!isa_supported(isa))
    throw InputError("instruction set not supported on this CPU: " + std::string(isa_name(isa)));
  return current().exchange(isa);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return active_isa() == Isa::Avx2 ? avx2::dot(a, b) : scalar::dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (active_isa() == Isa::Avx2)
    avx2::axpy(alpha, x, y);
  else
    scalar::axpy(alpha, x, y);
}

void standardize(std::span<const double> x, std::span<const double> mean,
                 std::span<const double> std_dev, std::span<double> out) {
  if (active_isa() == Isa::Avx2)
    avx2::standardize(x, mean, std_dev, out);
  else
    scalar::standardize(x, mean, std_dev, out);
}

}  // namespace judgekit::kernels
