// Copyright 2026 LSZone Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstdio>

int main() {
  std::puts("lszone: subcommands not wired up yet");
  return 2;
}
