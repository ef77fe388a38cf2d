"""Multipole and local expansions for complex-coordinate 2-D kernels.

Forms expansions from point sources, watches the truncation error decay
at the predicted geometric rate, and chains the three translation
operators against a brute-force reference.
"""

import numpy as np

from zfmm import fmm2d
from zfmm.cgeom import complex_distance
from zfmm.oracle import KernelSpec, direct_eval

rng = np.random.default_rng(1)

# Sources in a unit disk whose imaginary parts follow a Lipschitz map with
# constant L; targets in a small cluster three radii away.
L = 0.2
re_s = (2 * rng.random((40, 2)) - 1) / np.sqrt(2)
src = re_s + 1j * L * np.stack([np.sin(re_s @ [0.6, 0.8]), np.zeros(40)], axis=1)
q = rng.normal(size=40) + 1j * rng.normal(size=40)
re_t = np.array([3.0, 0.0]) + 0.05 * (2 * rng.random((15, 2)) - 1)
tgt = re_t + 1j * L * np.stack([np.sin(re_t @ [0.6, 0.8]), np.zeros(15)], axis=1)

u0 = direct_eval(KernelSpec("lap2d"), src, q, tgt)
center = np.zeros(2, complex)

# Truncation error decays like ((1+L)/(1-L) * r/R)^P -- the price of the
# complex deformation is the (1+L)/(1-L) factor.
rate = (1 + L) / (1 - L) / 3.0
print("order   max error      err ratio   predicted rate", round(rate, 3))
prev = None
for P in range(4, 26, 3):
    e = fmm2d.p2m_lap2(src, q, center, P)
    err = np.abs(fmm2d.m2p_lap2(e, tgt) - u0).max()
    print(f"P={P:3d}   {err:.3e}" + (f"    {(err/prev)**(1/3):.3f}" if prev else ""))
    prev = err

# Translations: shift the multipole (M2M), convert it to a local expansion
# near the targets (M2L), then re-center the local (L2L, exact).
P = 24
e = fmm2d.p2m_lap2(src, q, center, P)
e = fmm2d.m2m_lap2(e, np.array([0.2 + 0.02j, -0.1 + 0.01j]))
loc = fmm2d.m2l_lap2(e, np.array([3.1 + 0.01j, 0.05 + 0.0j]))
loc = fmm2d.l2l_lap2(loc, np.array([3.0 + 0.0j, 0.0 + 0.0j]))
u = fmm2d.l2p_lap2(loc, tgt)
print("\np2m -> m2m -> m2l -> l2l -> l2p error:",
      f"{np.abs(u - u0).max():.3e}")

# Helmholtz versions carry Bessel/Hankel radial factors; same choreography.
kappa = 2.4
u0h = direct_eval(KernelSpec("helm2d", kappa), src, q, tgt)
eh = fmm2d.p2m_helm2(src, q, center, kappa, 30)
loch = fmm2d.m2l_helm2(eh, np.array([3.0 + 0.0j, 0.0 + 0.0j]))
uh = fmm2d.l2p_helm2(loch, tgt)
print("Helmholtz p2m -> m2l -> l2p error:  ",
      f"{np.abs(uh - u0h).max():.3e}")

# Everything reduces to the classical real-coordinate story when the
# imaginary parts vanish.
u_real = fmm2d.m2p_lap2(fmm2d.p2m_lap2(re_s + 0j, q, center, 30), re_t + 0j)
u0_real = (np.log(complex_distance(re_t[:, None, :] + 0j, re_s[None] + 0j)) @ q)
print("real-coordinate reduction error:    ",
      f"{np.abs(u_real - u0_real).max():.3e}")
