"""How much of a peer's ranging intensity is actually usable.

When two agents range against each other, the helper's own position
uncertainty discounts the raw intensity nu down to an effective
eff = nu / (1 + nu * Delta(phi)), where Delta(phi) is the helper's
directional error bound along the inter-agent bearing. The discount
saturates: no matter how strong the measurement, the usable intensity
never exceeds 1 / Delta(phi).
"""

import math

from locbounds import EllipseForm, effective_rii

peer = EllipseForm(mu=2.0, eta=1.0, theta=0.0)
print("peer anchor information: F(mu=2, eta=1, theta=0)\n")

bearings = {"0": 0.0, "pi/4": math.pi / 4.0, "pi/2": math.pi / 2.0}
print(f"{'nu':>10} " + " ".join(f"{label:>12}" for label in bearings))
for exponent in range(-2, 7):
    nu = 10.0**exponent
    effs = [effective_rii(peer, nu, phi).eff for phi in bearings.values()]
    print(f"{nu:>10.2g} " + " ".join(f"{e:>12.5f}" for e in effs))

print("\nasymptotic ceilings 1/Delta(phi):")
for label, phi in bearings.items():
    delta = math.cos(phi) ** 2 / peer.mu + math.sin(phi) ** 2 / peer.eta
    print(f"  phi = {label:>5}: {1.0 / delta:.4f}")
print("\nalong the peer's strong axis the ceiling is mu (here 2.0); along its")
print("weak axis it is eta (here 1.0): a helper can never hand over more")
print("certainty than it has in that direction.")
