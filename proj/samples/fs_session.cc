// Sends a few messages over the key-recycling scheme with n = 4, once
// honestly and once through a bit-flip channel inside the correctable radius,
// then estimates the noisy reject rate and prints the security constants of the parameter set.

#include <cstdio>

#include "acbench/fsauth.hpp"

using namespace acbench;

int main() {
  const auto p = FsParams::make(4, 1, LinearCode::from_strings({"0000", "1111"}), 2, 2, 0.25, 1.0);
  std::printf("eps_ss = %g  eps_mac = %g  eps_adv = %g\n", p.eps_ss, p.eps_mac, eps_adv(p));

  Rng rng(derive_seed(42, 0));
  FsKeys keys = random_keys(p, ThetaSource::uniform(p.code), rng);
  for (std::uint64_t round = 0; round < 4; ++round) {
    const std::uint64_t y = round & 1;
    const auto st = round < 2 ? AttackStrategy::none() : AttackStrategy::noise(0b0100);
    const auto tr = run_attack(p, keys, st, y, derive_seed(42, round + 1));
    std::printf("round %llu  %-6s y=%llu  %s\n", static_cast<unsigned long long>(round), tr.strategy.c_str(),
                static_cast<unsigned long long>(y), tr.accept ? "accept" : "reject");
    // a reject releases no theta, so the parties switch to fresh keys
    keys = tr.accept ? tr.recycled : random_keys(p, ThetaSource::uniform(p.code), rng);
  }

  const SessionStrategy noisy{"noise", std::nullopt, {}, {}};
  const auto stats = fs_session_mc(p, ThetaSource::uniform(p.code), noisy, 20000, 7);
  std::printf("noisy sessions: reject rate %.4f (+- %.4f), bound %g\n", stats.reject_rate(), stats.width(),
              eps_noise(p, 0.0));
}
