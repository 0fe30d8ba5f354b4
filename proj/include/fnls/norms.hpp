#pragma once

#include <vector>

#include "fnls/field.hpp"

namespace fnls {

/// Rectangle-rule quadratures on the grid.  All norms agree across the
/// physical and frequency representations.
double l2_norm(const Field& f);
double lp_norm(const Field& f, double p);
double sup_norm(const Field& f);
/// ||D^s f||_2.
double sobolev_seminorm(const Field& f, double s);
/// L^p norm restricted to r_min <= |x| <= r_max.
double lp_norm_in_shell(const Field& f, double p, double r_min, double r_max);
/// <f, g> = sum conj(f) g h^N.
cplx inner_product(const Field& f, const Field& g);
/// sum f h^N.
cplx integral(const Field& f);

struct NormsReport {
  double l2 = 0.0;
  double lp = 0.0;
  double sobolev = 0.0;
  double sup = 0.0;
};

NormsReport norms(const Field& f, double p, double s);

/// Discrete L^q_t L^r_x norm of a time-sorted series (trapezoid rule in t).
/// q or r may be infinity.
double spacetime_norm(const std::vector<Snapshot>& series, double q, double r);

/// ||f - Pf||_2 / ||f||_2 where P averages over axis permutations and
/// reflections.  Returns 0 for the zero field.
double radiality_defect(const Field& f);

/// Average of f over the hyperoctahedral symmetry group of the grid.
Field symmetrize(const Field& f);

}  // namespace fnls
