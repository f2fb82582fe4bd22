#include "hmpc/costs.hpp"

#include <cmath>

namespace hmpc {
namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double fa, double b, double fb, double fm,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (b - a < kTimeTol) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_simpson(f, a, fa, b, fb, fm, whole, tol, 30);
}

double flow_cost_over(const CostSpec& spec, const FlowArc& arc, double a,
                      double b) {
  if (b - a < kTimeTol) return 0.0;
  if (spec.flow_cost_invariant) {
    return spec.L_C(arc.state_at(a), arc.input_at(a)) * (b - a);
  }
  auto f = [&](double t) { return spec.L_C(arc.state_at(t), arc.input_at(t)); };
  return integrate(f, a, b, spec.quadrature_tol);
}

}  // namespace

double evaluate_cost(const CostSpec& spec, const SolutionPair& sol) {
  const State xT = sol.terminal_state();
  if (!spec.in_X(xT)) {
    throw TerminalConstraintError("terminal state outside the terminal set");
  }
  double total = 0.0;
  for (const FlowArc& arc : sol.arcs) {
    total += flow_cost_over(spec, arc, arc.start_time(), arc.end_time());
  }
  for (std::size_t j = 0; j < sol.jump_inputs.size(); ++j) {
    total += spec.L_D(sol.arcs[j].x.back(), sol.jump_inputs[j]);
  }
  return total + spec.V(xT);
}

double running_cost_up_to(const CostSpec& spec, const SolutionPair& sol,
                          const HybridTime& ht) {
  if (!sol.dom.contains(ht)) {
    throw std::domain_error("hybrid time outside solution-pair domain");
  }
  double total = 0.0;
  const std::size_t level = static_cast<std::size_t>(ht.j);
  for (std::size_t j = 0; j < level; ++j) {
    const FlowArc& arc = sol.arcs[j];
    total += flow_cost_over(spec, arc, arc.start_time(), arc.end_time());
    total += spec.L_D(arc.x.back(), sol.jump_inputs[j]);
  }
  const FlowArc& arc = sol.arcs[level];
  total += flow_cost_over(spec, arc, arc.start_time(),
                          std::max(ht.t, arc.start_time()));
  return total;
}

}  // namespace hmpc
