#include <cstdio>

int main() {
  std::puts("tdal: cli not wired up yet");
  return 2;
}
