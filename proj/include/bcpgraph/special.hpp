#pragma once

namespace bcpg {

// log Beta(a, b) via the lgamma identity.
double log_beta(double a, double b);

// log of the incomplete beta integral  int_0^x t^(a-1) (1-t)^(b-1) dt
// (unnormalized: equals log Beta(a,b) at x = 1, not 0).
// Domain: x in [0,1], a > 0, b > 0. Returns -infinity at x = 0.
double log_incomplete_beta(double x, double a, double b);

// log(1 - exp(u)) for u <= 0, stable near both ends.
double log1mexp(double u);

}  // namespace bcpg
