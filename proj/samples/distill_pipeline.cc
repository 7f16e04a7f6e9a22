// Error correction, verification and privacy amplification on 6-bit
// sources: one with at most one flipped bit, one where Eve sees two bits and
// flips a bit of Bob's string.

#include <cstdio>

#include "acbench/distill.hpp"

using namespace acbench;

namespace {

void run(const char* name, const SourceModel& src, const EcParams& ec) {
  const auto pa = PaParams::make(src.n(), 1, src.k() - static_cast<double>(ec.r + ec.t));
  std::printf("%s\n", name);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = distill_pipeline(src, ec, pa, seed);
    std::printf("  seed %llu: %s", static_cast<unsigned long long>(seed), r.transcript.to_json().dump().c_str());
    if (r.key_a) std::printf("  keys %s/%s", r.key_a->to_string().c_str(), r.key_b->to_string().c_str());
    std::printf("\n");
  }
  std::printf("  final-key distance %.6g, bound %.6g\n", exact_final_distance(src, ec, pa), pipeline_bound(ec, pa));
}

}  // namespace

int main() {
  const std::size_t n = 6;
  // a 3-bit syndrome separates the 7 patterns of weight <= 1; key 44 is one
  // Toeplitz sketch that does (key 0 gives the zero matrix)
  run("bounded noise", make_bounded_noise_source(n, 1, n), EcParams::make(n, 3, 2, 0.17, 44));

  std::vector<std::uint64_t> tamper(std::size_t{1} << n);
  for (std::uint64_t x = 0; x < tamper.size(); ++x) tamper[x] = x ^ 0b000001;
  run("adversarial", make_adversarial_source(n, 0b100001, tamper), EcParams::make(n, 2, 2, 0.17, 0x15));
}
