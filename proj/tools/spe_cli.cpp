// tools/spe_cli.cpp  (placeholder; subcommands land with the cli module)

#include <cstdio>

int main() {
  std::puts("spe: cli under construction");
  return 0;
}
