#include <cstdio>

int main() {
  std::puts("oann: placeholder");
  return 0;
}
