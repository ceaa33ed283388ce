# coding: utf-8

# # Convergence bounds for the perturbative S matrix
#
# Each order of the Dyson series is bounded by a factorial decay times a
# power of a constant C(g) built from a weighted norm of the interaction
# cutoff g.  Below we compute C(g), the order bounds, where the series
# certainly becomes geometric, and a Monte Carlo estimate of the actual
# squared norm at low orders.

# In[1]:

import math

import numpy as np

from sgdesitter import bounds, estimator
from sgdesitter.bounds import Coupling
from sgdesitter.testfunctions import TestFunction

g = TestFunction.tau_indicator(np.pi / 4, 3 * np.pi / 4)


# In[2]:

for b2 in (np.pi, 2 * np.pi, 3 * np.pi):
    c = Coupling(b2)
    Cg = bounds.smatrix_constant_C(g, c)
    tail, k_star = bounds.tail_bound(0, c, Cg, target=1e-6)
    print(f"beta^2 = {b2 / np.pi:.0f} pi: C(g) = {Cg:.4g}, tail below 1e-6 from k = {k_star}")


# The bound is far from tight.  The estimated squared norms at k = 1, 2
# sit orders of magnitude below (k!)^(1 + beta^2/(4 pi)) C(g)^(2k).

# In[3]:

c = Coupling(2 * np.pi)
Cg = bounds.smatrix_constant_C(g, c)
for k in (1, 2):
    est = estimator.smatrix_norm2_estimate(k, c, g, budget=1_000_000, seed=0)
    bound = math.factorial(k) ** (1 + c.beta2 / (4 * np.pi)) * Cg ** (2 * k)
    print(f"k={k}: estimate {est.value:.4g} (99% upper {est.upper99:.4g}) <= bound {bound:.4g}")


# The light-cone singularity of the k = 1 integrand is integrable for every
# beta^2 < 4 pi; an importance-sampling substitution keeps the Monte Carlo
# variance finite where plain sampling would not.

# In[4]:

t = estimator.smatrix_norm2_estimate(1, c, g, scheme="tensor_adaptive")
m = estimator.smatrix_norm2_estimate(1, c, g, budget=2_000_000, seed=3)
print("tensor quadrature", t.value, " Monte Carlo", m.value, "+-", m.std_error)
