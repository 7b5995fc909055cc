#include <iostream>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "cli.hpp"

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Tape buffers are large and short-lived; keep them on the heap instead of
  // paying an mmap/munmap round trip (and page faults) for every tensor.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  std::vector<std::string> args(argv + 1, argv + argc);
  return pathgraph::cli::run(args, std::cout, std::cerr);
}
