#ifndef TAYLORLAW_STUDENT_T_HPP
#define TAYLORLAW_STUDENT_T_HPP

#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "taylorlaw/error.hpp"

namespace taylorlaw {

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof`
/// degrees of freedom: I_{dof/(dof+t^2)}(dof/2, 1/2).
inline double t_tail_probability(double t, int dof) {
  if (dof < 1) throw DomainError("t_tail_probability: dof must be >= 1, got " + std::to_string(dof));
  if (!std::isfinite(t)) throw DomainError("t_tail_probability: t must be finite");
  if (t == 0.0) return 1.0;
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + t * t);
  return boost::math::ibeta(nu / 2.0, 0.5, x);
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_STUDENT_T_HPP
