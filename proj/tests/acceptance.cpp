#include <cstdlib>
#include <iostream>
#include <string>

namespace {

bool not_implemented(int n) {
  std::cout << "criterion " << n << ": FAIL (not implemented)\n";
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <criterion 1..9>\n";
    return 2;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > 9) {
    std::cerr << "criterion out of range: " << argv[1] << "\n";
    return 2;
  }
  return not_implemented(n) ? 0 : 1;
}
