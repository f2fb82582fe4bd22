#include "hmpc/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hmpc {

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
    const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n == 0) return {x0, f(x0), 0};

  std::vector<Eigen::VectorXd> xs;
  std::vector<double> fs;
  xs.reserve(n + 1);
  xs.push_back(x0);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xi = x0;
    xi[i] += steps[i] != 0.0 ? steps[i] : 1e-3;
    xs.push_back(xi);
  }
  for (const auto& x : xs) fs.push_back(f(x));

  std::vector<int> order(static_cast<std::size_t>(n) + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[a] < fs[b]; });
  };

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    sort_simplex();
    const int best = order[0], worst = order[n], second = order[n - 1];
    if (fs[worst] - fs[best] <= opts.f_tol) break;
    double diam = 0.0;
    for (int i = 1; i <= n; ++i) {
      diam = std::max(diam, (xs[order[i]] - xs[best]).norm());
    }
    if (diam <= opts.x_tol) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += xs[order[i]];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + (centroid - xs[worst]);
    const double fr = f(xr);
    if (fr < fs[best]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - xs[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                : Eigen::VectorXd(centroid - 0.5 * (centroid - xs[worst]));
    const double fc = f(xc);
    if (fc < std::min(fr, fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      const int k = order[i];
      xs[k] = xs[best] + 0.5 * (xs[k] - xs[best]);
      fs[k] = f(xs[k]);
    }
  }
  sort_simplex();
  return {xs[order[0]], fs[order[0]], iter};
}

}  // namespace hmpc
