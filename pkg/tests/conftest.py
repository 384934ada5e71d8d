"""Shared helpers for the test suite."""

import math

import numpy as np
import pytest

from locbounds.infogeo import InfoMatrix2
from locbounds.network import Node, Topology
from locbounds.ranging import RangingLink


def random_pd_matrix(rng: np.random.Generator, scale: float = 1.0) -> InfoMatrix2:
    """Random well-conditioned positive definite 2x2 information matrix."""
    theta = rng.uniform(0.0, math.pi)
    mu = scale * math.exp(rng.uniform(-1.0, 1.5))
    eta = mu * rng.uniform(0.05, 1.0)
    c, s = math.cos(theta), math.sin(theta)
    return InfoMatrix2(
        mu * c * c + eta * s * s,
        (mu - eta) * s * c,
        mu * s * s + eta * c * c,
    )


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    ang = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([math.cos(ang), math.sin(ang)])


def random_topology(
    rng: np.random.Generator,
    n_agents: int,
    n_anchors: int = 4,
    side: float = 20.0,
    with_priors: bool = False,
    k_const: float = 1.0,
) -> Topology:
    """Random dense topology: uniform node positions, all pairwise links with
    free-space intensity, optional random diagonal priors on some agents."""
    half = side / 2.0
    nodes = []
    for i in range(n_agents):
        prior = None
        if with_priors and rng.random() < 0.5:
            d1, d2 = rng.uniform(0.01, 0.3, size=2)
            prior = np.diag([d1, d2])
        nodes.append(
            Node(f"a{i}", "agent", rng.uniform(-half, half, size=2), prior_info=prior)
        )
    for i in range(n_anchors):
        nodes.append(Node(f"b{i}", "anchor", rng.uniform(-half, half, size=2)))
    links = []
    for a in nodes[:n_agents]:
        for other in nodes:
            if other.node_id == a.node_id:
                continue
            dist = float(np.hypot(*(a.position - other.position)))
            links.append(
                RangingLink(from_id=a.node_id, to_id=other.node_id, rii=k_const / dist**2)
            )
    return Topology(nodes=tuple(nodes), links=tuple(links))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260811)
