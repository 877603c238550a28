#pragma once

#include <stdexcept>
#include <string>

namespace critgraph {

// Malformed or inconsistent input data (files, documents, tables).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (eigensolver non-convergence, training divergence).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace critgraph
