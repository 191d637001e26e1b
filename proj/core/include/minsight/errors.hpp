#pragma once

#include <stdexcept>
#include <string>

namespace minsight {

// Error categories map onto CLI exit codes:
//   usage/config problems (including std::invalid_argument) -> 2
//   file and data-format problems                           -> 3
//   numeric failures (divergence, sampling failure)         -> 4
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace minsight
