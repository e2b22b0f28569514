// Runs acceptance criteria by id (all ten when none are given) and prints one
// pass/fail line per criterion. Exit status is nonzero if any criterion fails.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <lorentz_fick/acceptance.hpp>

int main(int argc, char** argv) {
  namespace acc = lorentz_fick::acceptance;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::stoi(argv[i]));
  if (ids.empty())
    for (int id = 1; id <= 10; ++id) ids.push_back(id);
  acc::Options opt;
  if (const char* w = std::getenv("LORENTZ_FICK_WORKERS")) opt.workers = static_cast<unsigned>(std::stoul(w));
  bool all = true;
  for (int id : ids) {
    const auto r = acc::run(id, opt);
    std::cout << acc::line(r) << "  (" << r.seconds << " s)" << std::endl;
    std::cout << "  metrics: " << acc::to_json(r)["metrics"].dump() << std::endl;
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
