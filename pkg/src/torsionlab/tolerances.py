"""Numerical tolerance ladder used across the package.

One table, referenced everywhere, so that the meaning of each bound is
documented in a single place:

===================  =======  ====================================================
name                 value    used for
===================  =======  ====================================================
CONSTRUCTION         1e-12    d o d = 0, Hermiticity, partition-of-unity sums,
                              unit-ring membership, chain-map commutation
INVERTIBILITY        1e-9     smallest singular value of d + d^dagger for a single
                              complex to count as acyclic
FAMILY_ACYCLICITY    1e-6     uniform lower bound on the smallest singular value of
                              d + d^dagger over a sampled family
FAMILY_LEVEL         1e-6     family-level equalities (additivity, degree-0
                              consistency with the scalar torsion)
OVERLAP_SAMPLES      1e-10    pointwise agreement of family samples on chart
                              overlaps (same global basis)
QUADRATURE           1e-8     stability bound for the adaptive lambda quadrature
EIGEN_FLOOR          1e-12    smallest eigenvalue admitted before fractional
                              powers/logs refuse to evaluate
PAIR_FLOOR           1e-3     lower bound on a cancelling-pair entry away from a
                              birth-death wall
===================  =======  ====================================================
"""

CONSTRUCTION = 1e-12
INVERTIBILITY = 1e-9
FAMILY_ACYCLICITY = 1e-6
FAMILY_LEVEL = 1e-6
OVERLAP_SAMPLES = 1e-10
QUADRATURE = 1e-8
EIGEN_FLOOR = 1e-12
PAIR_FLOOR = 1e-3
