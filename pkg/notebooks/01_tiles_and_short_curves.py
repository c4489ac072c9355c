# %% [markdown]
# # Thick and thin tiles
#
# A point of moduli space is given in Fenchel-Nielsen coordinates on a pants
# decomposition. Its short curves fix the thin tile it lies in. Here we walk
# one point of the genus-2 surface down into the thin part.

# %%
import math

import numpy as np

from moduli_tiler.hyperbolic import FNPoint, build_holonomy, geodesic_length, twist_flow
from moduli_tiler.surface_topology import builtin_decomposition, complexity
from moduli_tiler.tiling import apex_level, classify_tile, enumerate_short_geodesics

pd = builtin_decomposition("s20_theta")
print(pd.surface.name, "complexity", complexity(pd.surface), "curves", pd.curve_ids)

# %% [markdown]
# Holonomy reproduces the pants lengths, so the coordinates can be read back.

# %%
x = FNPoint(pd, (1.0, 0.7, 1.3), (0.2, 0.0, -0.1))
hol = build_holonomy(x)
for cid in pd.curve_ids:
    print(cid, geodesic_length(hol, pd.alphabet["curve_words"][cid]))
print("relator residual", hol.relator_residual)

# %% [markdown]
# Shrinking two curves below epsilon puts the point in a thin tile. The cone
# coordinates are u - a, with u = -log(l) / 2 and a the apex level.

# %%
eps = 0.1
a = apex_level(eps)
for scale in (1.0, 0.1, 0.01, 0.001):
    y = FNPoint(pd, (scale, scale * 2, 1.0), x.twists)
    tile = classify_tile(y, eps)
    print(f"{scale:7.3f}", tile.kind, tile.sigma, np.round(tile.cone_coords, 4))

# %% [markdown]
# A full twist about a short curve is a mapping class, so it leaves the tile
# and its cone coordinates unchanged.

# %%
y = FNPoint(pd, (0.01, 0.02, 1.0), x.twists)
z = twist_flow(y, "a", y.length("a"))
print(classify_tile(y, eps).cone_coords == classify_tile(z, eps).cone_coords)
rep = enumerate_short_geodesics(y, eps)
print("certified complete:", rep.complete)
for c, l in rep.curves:
    print(c.word, l, "u - a =", -math.log(l) / 2 - a)
