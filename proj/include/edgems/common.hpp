#pragma once

#include <stdexcept>
#include <string>

// Precondition violations throw std::invalid_argument (a caller/config error),
// numerical failures throw std::runtime_error (a solver error). The CLI maps
// these onto exit codes 1 and 2 respectively.
#define EDGEMS_REQUIRE(cond, msg)                  \
  do {                                             \
    if (!(cond)) throw std::invalid_argument(msg); \
  } while (0)

#define EDGEMS_CHECK(cond, msg)                 \
  do {                                          \
    if (!(cond)) throw std::runtime_error(msg); \
  } while (0)
