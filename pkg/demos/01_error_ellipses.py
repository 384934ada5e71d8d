"""Information ellipses and the closed-form anchor update.

An agent's position information is a 2x2 PSD matrix; its eigen form
(mu, eta, theta) is the information ellipse. Each ranging observation adds
a rank-one slice nu * R(phi), and the squared position error bound (SPEB)
is trace of the inverse. This walk-through fuses one extra observation into
an anisotropic ellipse at a sweep of bearings and shows where the bound is
best and worst.
"""

import math

import numpy as np

from locbounds import EllipseForm, fuse_anchor, rdm, speb, to_ellipse

base = EllipseForm(mu=2.0, eta=1.0, theta=0.0)
print(f"starting ellipse: mu={base.mu}, eta={base.eta}, theta={base.theta}")
print(f"starting SPEB: {speb(base.to_matrix()):.4f} m^2\n")

nu = 1.0
print(f"fusing one extra observation of intensity nu={nu} at bearing phi:")
print(f"{'phi/pi':>8} {'mu~':>8} {'eta~':>8} {'theta~':>8} {'SPEB':>8}")
for frac in (0.0, 0.125, 0.25, 0.375, 0.5):
    phi = frac * math.pi
    updated, new_speb = fuse_anchor(base, nu, phi)
    print(
        f"{frac:>8.3f} {updated.mu:>8.4f} {updated.eta:>8.4f} "
        f"{updated.theta:>8.4f} {new_speb:>8.4f}"
    )

# The best bearing pushes on the weak axis (phi = theta + pi/2); the worst
# re-inforces the strong axis (phi = theta).
grid = np.linspace(0.0, math.pi, 721)
spebs = [fuse_anchor(base, nu, phi)[1] for phi in grid]
best = grid[int(np.argmin(spebs))]
worst = grid[int(np.argmax(spebs))]
print(f"\nbest bearing  : {best / math.pi:.3f} pi  (weak axis at theta + pi/2)")
print(f"worst bearing : {worst / math.pi:.3f} pi  (strong axis at theta)")
print(f"closed-form optimum: {(base.mu + base.eta + nu) / (base.mu * (base.eta + nu)):.4f} m^2")

# Round trip: the ellipse is just the eigen view of the matrix.
matrix = base.to_matrix().as_array() + nu * rdm(best).as_array()
from locbounds import InfoMatrix2

print(f"eigen view of the best update: {to_ellipse(InfoMatrix2.from_array(matrix))}")
