#include <cstdlib>
#include <iostream>

#include "swm/acceptance.hpp"

int main()
{
    return swm::run_acceptance(std::cout) == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
