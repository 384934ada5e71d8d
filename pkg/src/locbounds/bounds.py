"""Closed-form lower/upper approximations of per-agent information.

Reducing the full network information onto one agent is exact but opaque;
these operations give interpretable closed forms:

- ``effective_rii``: in a two-agent network the peer's contribution is its
  raw intensity nu discounted by the peer's own directional uncertainty,
  eff = nu / (1 + nu * Delta(phi)), where Delta(phi) is the peer's DPEB
  along the inter-agent bearing. As nu grows, eff saturates at 1 / Delta.
- ``two_agent_exact``: the exact per-agent 2x2 information for two
  cooperating agents, J_e = J_A + xi * nu * R(phi).
- ``efim_bounds``: for any network, per-agent information is sandwiched
  between weighted RI sums J_L <= J_e <= J_U whose weights
  xi^L_kj = 1 / (1 + nu Delta_j) and xi^U_kj = 1 / (1 + nu Delta~_j) use,
  respectively, the peer's anchor-only information and the peer's anchor
  information inflated by twice its other cooperation links. With only two
  agents the weights coincide and the sandwich is tight.

Peers whose anchor information is singular along the coupling direction
contribute nothing (xi = 0); this conservative convention is flagged
explicitly in the returned coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .infogeo import EllipseForm, InfoMatrix2, rdm, to_ellipse
from .network import NetworkEfim, Topology, build_efim

__all__ = [
    "EffectiveRii",
    "CooperationCoeffs",
    "peer_dpeb",
    "effective_rii",
    "two_agent_exact",
    "efim_bounds",
    "efim_bounds_all",
]


class EffectiveRii(NamedTuple):
    """Discounted cooperation intensity with its discount factor."""

    xi: float
    eff: float
    peer_singular: bool


@dataclass(frozen=True)
class CooperationCoeffs:
    """Per-peer discount coefficients of the lower/upper approximations.

    Satisfies 0 <= xi_l <= xi_u <= 1 entrywise; ``singular_peers`` flags
    peers whose anchor information could not be inverted along the coupling
    direction (their xi_l is the conservative 0).
    """

    peer_ids: tuple[str, ...]
    xi_l: np.ndarray
    xi_u: np.ndarray
    singular_peers: tuple[bool, ...]

    def __post_init__(self) -> None:
        xi_l = np.array(self.xi_l, dtype=float)
        xi_u = np.array(self.xi_u, dtype=float)
        if xi_l.shape != (len(self.peer_ids),) or xi_u.shape != xi_l.shape:
            raise ValueError("coefficient arrays must match peer_ids")
        if np.any(xi_l < -1e-12) or np.any(xi_u > 1.0 + 1e-12) or np.any(xi_l > xi_u + 1e-12):
            raise ValueError("coefficients must satisfy 0 <= xi_l <= xi_u <= 1")
        xi_l.flags.writeable = False
        xi_u.flags.writeable = False
        object.__setattr__(self, "xi_l", xi_l)
        object.__setattr__(self, "xi_u", xi_u)


# An eigenvalue this far below the dominant one is float dust from a
# rank-deficient construction, not information; anisotropy up to the
# reciprocal of this ratio is honored (a peer that is merely very certain
# in one direction is not singular).
_EIG_ZERO_REL = 1e-13


def peer_dpeb(e: EllipseForm, phi: float) -> float:
    """Directional error bound of a peer along ``phi`` from its eigen form.

    Delta(phi) = cos^2(theta - phi)/mu + sin^2(theta - phi)/eta; infinite
    when the peer carries no information along the bearing.
    """
    rel = e.theta - phi
    c2 = math.cos(rel) ** 2
    s2 = math.sin(rel) ** 2
    tol = _EIG_ZERO_REL * max(e.mu, 0.0)
    out = 0.0
    if c2 > 0.0:
        if e.mu <= tol:
            return math.inf
        out += c2 / e.mu
    if s2 > 0.0:
        if e.eta <= tol:
            return math.inf
        out += s2 / e.eta
    return out


def effective_rii(ja_peer: EllipseForm, nu: float, phi: float) -> EffectiveRii:
    """Cooperation intensity usable by an agent, given its peer's own bound.

    xi = 1 / (1 + nu * Delta(phi)) and eff = xi * nu; eff increases
    monotonically in nu and saturates at 1 / Delta(phi). A peer singular
    along phi contributes nothing (xi = 0, flagged).
    """
    if nu < 0.0:
        raise ValueError("cooperation intensity must be nonnegative")
    delta = peer_dpeb(ja_peer, phi)
    if math.isinf(delta):
        return EffectiveRii(xi=0.0, eff=0.0, peer_singular=True)
    xi = 1.0 / (1.0 + nu * delta)
    return EffectiveRii(xi=xi, eff=xi * nu, peer_singular=False)


def two_agent_exact(
    ja1: InfoMatrix2, ja2: InfoMatrix2, nu: float, phi: float
) -> tuple[InfoMatrix2, InfoMatrix2]:
    """Exact per-agent information for two cooperating agents.

    J_e(p1) = J_A(p1) + xi_12 nu R(phi) with xi_12 = 1 / (1 + nu Delta_2)
    and Delta_2 = q^T J_A(p2)^-1 q; symmetrically for agent 2. Equals the
    4x4 joint reduction. Uses the direct quadratic form for Delta (the
    eigen-form route in ``effective_rii`` is the cross check).
    """
    if nu < 0.0:
        raise ValueError("cooperation intensity must be nonnegative")
    q = np.array([math.cos(phi), math.sin(phi)])
    r = rdm(phi)

    def _one(own: InfoMatrix2, peer: InfoMatrix2) -> InfoMatrix2:
        eig_max, eig_min = peer.eigenvalues()
        if eig_min <= _EIG_ZERO_REL * max(eig_max, 0.0):
            delta = math.inf
        else:
            delta = float(q @ np.linalg.solve(peer.as_array(), q))
        xi = 0.0 if math.isinf(delta) else 1.0 / (1.0 + nu * delta)
        return own + r.scaled(xi * nu)

    return _one(ja1, ja2), _one(ja2, ja1)


def _pair_data(net: NetworkEfim) -> dict[tuple[int, int], tuple[float, float]]:
    """Extract (nu, phi) for each cooperating pair from assembled blocks.

    Raises when a pair block is not rank one (Prop.-4-style bounds assume
    each cooperation block is a single ranging direction).
    """
    pairs: dict[tuple[int, int], tuple[float, float]] = {}
    n = net.n_agents
    for k in range(n):
        for m in range(k + 1, n):
            c = -net.j_c[2 * k : 2 * k + 2, 2 * m : 2 * m + 2]
            nu = float(np.trace(c))
            if nu <= 0.0:
                continue
            phi = 0.5 * math.atan2(2.0 * c[0, 1], c[0, 0] - c[1, 1])
            residual = c - nu * rdm(phi).as_array()
            if float(np.max(np.abs(residual))) > 1e-8 * nu:
                raise ValueError(
                    f"cooperation block between agents {net.agent_ids[k]!r} and "
                    f"{net.agent_ids[m]!r} is not rank one; the closed-form bounds "
                    "require a single coupling direction per pair"
                )
            pairs[(k, m)] = (nu, phi)
    return pairs


def _adjacency(
    pairs: dict[tuple[int, int], tuple[float, float]]
) -> dict[int, list[tuple[int, float, float]]]:
    """Per-agent list of (peer, nu, phi), sorted by peer index."""
    adj: dict[int, list[tuple[int, float, float]]] = {}
    for (a, b), (nu, phi) in pairs.items():
        adj.setdefault(a, []).append((b, nu, phi))
        adj.setdefault(b, []).append((a, nu, phi))
    for entries in adj.values():
        entries.sort()
    return adj


def _bounds_for_agent(
    net: NetworkEfim,
    k: int,
    adjacency: dict[int, list[tuple[int, float, float]]],
    coop_sums: np.ndarray,
) -> tuple[InfoMatrix2, InfoMatrix2, CooperationCoeffs]:
    """Shared core of ``efim_bounds``; ``coop_sums[j]`` pre-sums agent j's
    cooperation RIs so each peer's inflated matrix is O(1) to form."""
    base = net.j_a + net.xi_p
    own = InfoMatrix2.from_array(base[2 * k : 2 * k + 2, 2 * k : 2 * k + 2])

    peer_ids: list[str] = []
    xi_l_vals: list[float] = []
    xi_u_vals: list[float] = []
    flags: list[bool] = []
    low = own
    high = own
    for j, nu, phi in adjacency.get(k, ()):
        peer_base = base[2 * j : 2 * j + 2, 2 * j : 2 * j + 2]
        lower_res = effective_rii(to_ellipse(InfoMatrix2.from_array(peer_base)), nu, phi)

        # J_A(p_j) plus twice the peer's other cooperation links
        inflated = peer_base + 2.0 * (coop_sums[j] - nu * rdm(phi).as_array())
        upper_res = effective_rii(to_ellipse(InfoMatrix2.from_array(inflated)), nu, phi)

        # inflating the peer can only shrink Delta, so xi_u >= xi_l; guard
        # the float boundary so the invariant holds exactly
        xi_l = min(lower_res.xi, upper_res.xi)
        xi_u = upper_res.xi
        peer_ids.append(net.agent_ids[j])
        xi_l_vals.append(xi_l)
        xi_u_vals.append(xi_u)
        flags.append(lower_res.peer_singular)
        low = low + rdm(phi).scaled(xi_l * nu)
        high = high + rdm(phi).scaled(xi_u * nu)

    coeffs = CooperationCoeffs(
        peer_ids=tuple(peer_ids),
        xi_l=np.array(xi_l_vals),
        xi_u=np.array(xi_u_vals),
        singular_peers=tuple(flags),
    )
    return low, high, coeffs


def _coop_sums(net: NetworkEfim, pairs: dict[tuple[int, int], tuple[float, float]]) -> np.ndarray:
    sums = np.zeros((net.n_agents, 2, 2))
    for (a, b), (nu, phi) in pairs.items():
        block = nu * rdm(phi).as_array()
        sums[a] += block
        sums[b] += block
    return sums


def efim_bounds(
    topo: Topology | NetworkEfim, agent_id: str
) -> tuple[InfoMatrix2, InfoMatrix2, CooperationCoeffs]:
    """Sandwich one agent's information between closed-form RI sums.

    Returns (J_L, J_U, coeffs) with J_L <= J_e(p_k) <= J_U in the PSD order,
    hence trace(J_U^-1) <= SPEB <= trace(J_L^-1). Agent priors, if any, ride
    along additively on both sides.
    """
    net = topo if isinstance(topo, NetworkEfim) else build_efim(topo)
    k = net.index(agent_id)
    pairs = _pair_data(net)
    return _bounds_for_agent(net, k, _adjacency(pairs), _coop_sums(net, pairs))


def efim_bounds_all(
    topo: Topology | NetworkEfim,
) -> dict[str, tuple[InfoMatrix2, InfoMatrix2, CooperationCoeffs]]:
    """``efim_bounds`` for every agent, sharing the pair extraction."""
    net = topo if isinstance(topo, NetworkEfim) else build_efim(topo)
    pairs = _pair_data(net)
    adjacency = _adjacency(pairs)
    sums = _coop_sums(net, pairs)
    return {
        agent_id: _bounds_for_agent(net, k, adjacency, sums)
        for k, agent_id in enumerate(net.agent_ids)
    }
