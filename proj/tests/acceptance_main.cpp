#include <iostream>

#include "toeporb/acceptance.hpp"

int main() {
  const int failures = toeporb::acceptance::run_acceptance(std::cout);
  return failures == 0 ? 0 : 1;
}
