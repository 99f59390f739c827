#include "sparse_spike/result.hpp"

#include <algorithm>
#include <cmath>

namespace sparse_spike {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(std::abs(a.dot(b)) / (na * nb), 0.0, 1.0);
}

void attach_correlation(RecoveryResult& result, const Instance& inst) {
  if (inst.spike.values.size() == result.estimate.size() && inst.spike.values.size() > 0) {
    result.correlation = correlation(result.estimate, inst.spike.values);
  }
}

}  // namespace sparse_spike
