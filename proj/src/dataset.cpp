#include "proxbridge/dataset.hpp"

#include <string>

#include "proxbridge/errors.hpp"

namespace proxbridge {

void Dataset::validate() const {
  const Eigen::Index m = n();
  if (a.size() != m || z.size() != m || w.size() != m)
    throw data_error("dataset columns have inconsistent lengths");
  if (x.cols() > 0 && x.rows() != m)
    throw data_error("dataset covariate block has inconsistent length");
  for (Eigen::Index i = 0; i < m; ++i)
    if (a(i) != 0 && a(i) != 1)
      throw data_error("treatment must be binary; found " + std::to_string(a(i)) +
                       " at row " + std::to_string(i));
}

}  // namespace proxbridge
