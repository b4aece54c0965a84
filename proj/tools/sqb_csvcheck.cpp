// Validates metrics CSV files written by sqb_bench.

#include <fstream>
#include <iostream>

#include "sqb/errors.hpp"
#include "sqb/experiment.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: sqb_csvcheck FILE...\n";
    return 2;
  }
  int status = 0;
  for (int i = 1; i < argc; ++i) {
    std::ifstream in(argv[i]);
    if (!in) {
      std::cerr << argv[i] << ": cannot open\n";
      status = 1;
      continue;
    }
    try {
      const auto rows = sqb::read_metrics_csv(in);
      std::cout << argv[i] << ": ok, " << rows.size() << " rows\n";
    } catch (const sqb::ParseError& e) {
      std::cerr << argv[i] << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}
