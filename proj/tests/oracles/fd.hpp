#pragma once

// Central differences with one Richardson step (error O(h^4)).

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double rel_step = 1e-3) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel_step * (1.0 + std::abs(x[j]));
    auto central = [&](double s) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += s;
      xm[j] -= s;
      return (f(xp) - f(xm)) / (2.0 * s);
    };
    g[j] = (4.0 * central(h / 2) - central(h)) / 3.0;
  }
  return g;
}

}  // namespace oracle
