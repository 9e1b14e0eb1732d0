#include "unmix/kernels.hpp"

#include <cstdlib>
#include <string>

#include "unmix/errors.hpp"

namespace unmix::kernels {

namespace detail {
extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;
#endif
}  // namespace detail

namespace {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

const Ops& table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      return detail::avx2_ops;
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return detail::neon_ops;
#endif
    default:
      return detail::scalar_ops;
  }
}

Isa detect() {
  if (const char* env = std::getenv("UNMIX_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
    if (want == "neon" && isa_available(Isa::neon)) return Isa::neon;
    // Unknown or unavailable request falls through to autodetect.
  }
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

struct State {
  Isa isa = detect();
  const Ops* ops = &table_for(detect());
};

State& state() {
  static State s;
  return s;
}

}  // namespace

const Ops& active() { return *state().ops; }

Isa active_isa() { return state().isa; }

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

void force(Isa isa) {
  if (!isa_available(isa)) {
    throw ArgumentError("kernel ISA '" + isa_name(isa) +
                        "' is not available on this machine");
  }
  state().isa = isa;
  state().ops = &table_for(isa);
}

void reset_to_default() {
  state().isa = detect();
  state().ops = &table_for(state().isa);
}

}  // namespace unmix::kernels
