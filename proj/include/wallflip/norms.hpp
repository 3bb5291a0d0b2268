#pragma once

#include "wallflip/observables.hpp"

namespace wallflip {

struct HNegNormResult {
  double value = 0.0;
  double tail_bound = 0.0;
  double zeta_cut = 0.0;
};

/// Negative-Sobolev norm sqrt( int (1+zeta^2)^{-s0} |ghat|^2 dzeta ) over
/// [-Z, Z], with a rigorous bound on the omitted tail. Needs s0 > 1/2 and
/// g(0) = 0. zeta_cut <= 0 selects the default 20 pi / spacing; the cut is
/// rounded up to a whole number of lattice-sum periods. Throws when the
/// tail bound exceeds 10% of the head integral.
HNegNormResult norm_h_neg_s0(const GridFunction& g, double s0,
                             double zeta_cut = 0.0);

/// r-th power of the fractional Sobolev (Slobodeckij) norm on the grid
/// support: int |f|^r + double integral of |f(x)-f(y)|^r / |x-y|^{1+s1 r}.
/// Exact in x for the piecewise-linear interpolation; the difference-lag
/// integral uses Gauss panels with the lag singularity absorbed by a power
/// substitution. Needs 0 < s1 < 1/2 and r >= 1.
double norm_w_s1_r(const GridFunction& g, double s1, double r);

/// Grid-restricted weighted Hoelder norm: max |f| plus the maximal quotient
/// |f(x)-f(y)| / |x-y|^b over node pairs at distance >= spacing. Any
/// exponential weight is expected to be baked into the grid values already.
double norm_c_holder(const GridFunction& g, double b);

double sup_norm(const GridFunction& g);

}  // namespace wallflip
