# coding: utf-8

# # States and two-point functions on the de Sitter cylinder
#
# Points are (tau, theta) with tau in (0, pi). The alpha-family of vacua
# differs only in its zero mode, so the commutator is the same for every
# alpha while the symmetric part is not.

# In[1]:

import numpy as np

from sgdesitter import geometry, modes, propagators
from sgdesitter.modes import Regulator, StateAlpha

st = StateAlpha(1.0)


# A rotation and a boost moving a point around the cylinder.  The finite
# flows are exact; composing with the inverse returns the start point.

# In[2]:

g = geometry.GroupParams(a=0.3, b=0.2, c=-0.1)
t, h = geometry.transform(g, 1.2, 0.5)
print("moved point", float(t), float(h))
print("back again ", [float(v) for v in geometry.transform(g, t, h, inverse=True)])


# The closed form of the Wightman function against its regulated mode sum.
# With matching regulator the two agree to rounding.

# In[3]:

p, q = (1.0, 0.2), (1.5, 1.4)
eps = 0.05
closed = propagators.wightman(p, q, st, epsilon=eps)
summed = modes.mode_sum_kernel(800, Regulator(eps), p, q, st)
print("closed form", closed)
print("mode sum   ", summed, " |diff|", abs(closed - summed))


# The alpha dependence sits entirely in the real part.  The imaginary part
# is the commutator, which vanishes here because the points are spacelike.

# In[4]:

for a in (0.5, 1.0, 2.0, 8.0):
    w = propagators.wightman(p, q, StateAlpha(a))
    print(f"alpha={a:4}: {w.real:+.6f} {w.imag:+.6f}i")


# Boosts are not a symmetry of these states.  The variation of the
# two-point function under a boost tends to a nonzero limit; only its
# zero-mode piece falls off, like alpha^-2.

# In[5]:

limit = propagators.boost_variation(p, q, StateAlpha(1e6), "boost1")
for a in (1.0, 10.0, 100.0):
    v = propagators.boost_variation(p, q, StateAlpha(a), "boost1")
    print(f"alpha={a:6}: boost variation {abs(v):.4e}, distance to the limit {abs(v - limit):.3e}")
