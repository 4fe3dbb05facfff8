// Usage: acceptance_test [id...]. Prints one PASS/FAIL line per criterion.

#include <cstdlib>
#include <iostream>
#include <string>

#include "freewalk/acceptance.hpp"

using namespace freewalk;

int main(int argc, char** argv) {
  acceptance::Context ctx;
  const auto& all = acceptance::criteria();
  int failed = 0;
  auto one = [&](const acceptance::Criterion& c) {
    auto r = acceptance::run(c, ctx);
    std::cout << acceptance::format(r) << std::endl;
    failed += !r.pass;
  };
  if (argc < 2) {
    for (const auto& c : all) one(c);
  } else {
    for (int i = 1; i < argc; ++i) {
      const int id = std::atoi(argv[i]);
      bool found = false;
      for (const auto& c : all)
        if (c.id == id) {
          one(c);
          found = true;
        }
      if (!found) {
        std::cerr << "no criterion " << argv[i] << '\n';
        return 2;
      }
    }
  }
  return failed ? 1 : 0;
}
