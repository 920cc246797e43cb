"""Numerical tolerances shared across the package.

All geometric code reads its epsilons from here so that the conventions
stay consistent: 1e-12 for unit-norm and degeneracy checks, 1e-9 for
parallelism and plane-membership checks.
"""

# Vectors shorter than this are treated as zero (inversion, normalization).
EPS_DEGENERATE = 1e-12

# Unit vectors must satisfy | ||v|| - 1 | <= EPS_UNIT.
EPS_UNIT = 1e-12

# Two unit directions d1, d2 count as parallel when |d1 . d2| >= 1 - EPS_PARALLEL.
EPS_PARALLEL = 1e-9

# 2D orientation predicates treat a triple as collinear when the sine of
# the spanned angle is below this.
EPS_COLLINEAR = 1e-9

# Condition-number limit for the multi-line least-squares normal matrix.
CONDITION_LIMIT = 1e12

# Minimum cos(angular distance) for a point to count as inside an open
# hemisphere when projecting; the hard mathematical limit is 0.
EPS_HEMISPHERE = 1e-9

# Arcs are clipped against hemispheres at this cos margin instead of
# EPS_HEMISPHERE: projected coordinates stay below ~50, which keeps the 2D
# intersection predicates well inside double precision. The twelve
# hemisphere centers cover the sphere with ~37.4 degrees worst-case
# distance, so a 0.02 margin (~88.9 degrees) loses nothing.
HEMISPHERE_CLIP_MARGIN = 0.02

# Sender placement keeps this clearance (meters) from walls and receiver.
PLACEMENT_CLEARANCE = 0.01
