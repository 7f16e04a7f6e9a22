// Two small construction claims composed in series and in parallel, checked
// by exact distinguishing.

#include <cstdio>

#include "acbench/harness.hpp"

using namespace acbench;

namespace {

void show(const ConstructionClaim& c) {
  const auto chk = verify_claim(c);
  std::printf("%-28s %s -> %s  eps %.3f  advantage %.6f  %s\n", c.name.c_str(), c.real_label.c_str(),
              c.ideal_label.c_str(), c.epsilon, chk.advantage.lo, chk.pass ? "ok" : "VIOLATED");
}

}  // namespace

int main() {
  const auto a = fixtures::biased_claim(0.1), b = fixtures::flip_claim(0.2), leak = fixtures::leak_claim(0.25);
  show(a);
  show(b);
  show(compose_serial(a, b));
  show(compose_parallel(a, leak));
  show(fixtures::broken_claim());
  try {
    compose_serial(b, a);
  } catch (const RejectedInput& e) {
    std::printf("serial b then a: %s\n", e.what());
  }
}
