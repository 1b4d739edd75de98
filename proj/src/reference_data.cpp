#include "cutspec/harness.hpp"

namespace cutspec {

// Generated with:
//   cutspec run --config configs/circle_eigen_oracle.conf
const std::vector<double>& circle_eigen_reference() {
  static const std::vector<double> values{
      9.360914280674157, 23.770657601943253, 23.77065760461263,
      42.71707626468222, 42.718543532709475, 49.32151702149008};
  return values;
}

}  // namespace cutspec
