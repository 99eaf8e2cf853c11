// Writes a synthetic plain-text corpus: make_synthetic TOKENS SEED [PLANTED] > out.txt

#include <cstdlib>
#include <iostream>

#include "support/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: make_synthetic TOKENS SEED [PLANTED_PER_LENGTH]\n";
    return 2;
  }
  chancegram::testing::SyntheticSpec spec;
  spec.tokens = std::strtoull(argv[1], nullptr, 10);
  spec.seed = std::strtoull(argv[2], nullptr, 10);
  spec.planted_bigrams = spec.planted_trigrams = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 20;
  std::cout << chancegram::testing::make_synthetic_text(spec);
}
