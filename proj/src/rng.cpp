// Apache License, Version 2.0, refer to LICENSE.txt

#include "ellslice/rng.hpp"

#include <vector>

namespace ellslice {

RngStream::RngStream(std::uint64_t master_seed,
                     std::initializer_list<std::uint64_t> stream_indices) {
  std::vector<std::uint32_t> words;
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (auto idx : stream_indices) push(idx);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

double RngStream::uniform() {
  // libstdc++'s generate_canonical can round up to exactly 1.
  double u;
  do {
    u = std::generate_canonical<double, 53>(engine_);
  } while (u >= 1.0);
  return u;
}

Eigen::VectorXd RngStream::standard_normal(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

}  // namespace ellslice
