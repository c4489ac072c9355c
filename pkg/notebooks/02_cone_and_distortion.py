# %% [markdown]
# # The cone over the quotient complex
#
# Maximal thin tiles are cones over the simplices of a finite spherical
# complex. This walk-through measures how closely the rescaled maps f_n carry
# the model metric onto the Euclidean cone over that complex.

# %%
import math

import numpy as np

from moduli_tiler.asymptotic_cone import build_net, estimate_distortion, f1_map, flat_sector_probe, net_point
from moduli_tiler.cone_complex import builtin_catalog, comparison_defect, cone_distance, random_cone_point

K = builtin_catalog("s20")
print("simplices by dimension:",
      {d: sum(s.dim == d for s in K.simplices.values()) for d in range(K.dim + 1)})

# %% [markdown]
# The cone is CAT(0): sampled comparison defects vanish up to rounding.

# %%
rng = np.random.default_rng(0)
defects = [comparison_defect(K, *(random_cone_point(K, rng, 3.0) for _ in range(3))) for _ in range(200)]
print("max comparison defect", max(defects))

# %% [markdown]
# Net points have cone coordinates u - a. The dumbbell cone has a symmetry
# swapping its two handle curves, so f_1 folds the octant: the distance is
# the smaller of the two Euclidean candidates.

# %%
net = build_net(K)
cone = next(c for c in net.cones if c.pd.name == "s20_dumbbell")
print(cone.curves)
p, q = (f1_map(net, net_point(net, cone, v)) for v in ([3.0, 1.0, 2.0], [1.0, 4.0, 2.0]))
print(cone_distance(p, q, K), math.dist([3, 1, 2], [1, 4, 2]), math.dist([3, 1, 2], [1, 2, 4]))

# %% [markdown]
# The sup defect of f_n falls like 1/n, so n times the defect is constant.

# %%
for rep in estimate_distortion(net, [1, 2, 4, 8], 10.0, 200, seed=0):
    print(rep.n, rep.sup_defect, rep.n * rep.sup_defect)

# %% [markdown]
# A square in a net cone has diagonal/side ratio sqrt(2): the cone is flat there.

# %%
for r in (10.0, 20.0, 40.0):
    rep = flat_sector_probe(net, r)
    print(r, rep.ratio, rep.deviation, rep.bound)
