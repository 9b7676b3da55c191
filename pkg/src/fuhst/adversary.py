"""Byzantine model-poisoning attacks and malicious-node placement."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .topology import MultiDomainGraph

NOISE_MU = 0.1
NOISE_SIGMA2 = 0.1
IPM_EPSILON = 100.0


class Placement(str, Enum):
    RANDOM = "random"
    DISTRIBUTED = "distributed"
    INTER_DOMAIN = "inter_domain_attacks"
    NO_INTER_DOMAIN = "no_inter_domain_attacks"


@dataclass(frozen=True)
class AttackSpec:
    """Attack kind and parameters.

    ``kind`` is one of ``"none"``, ``"noise"``, ``"sign_flip"``, ``"ipm"``.
    ``ipm_knowledge`` selects whether IPM attackers see every honest update
    of the round (``"global"``) or only their honest neighbors' (``"neighbors"``).
    """

    kind: str = "none"
    mu: float = NOISE_MU
    sigma2: float = NOISE_SIGMA2
    epsilon: float = IPM_EPSILON
    ipm_knowledge: str = "global"
    malicious: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in ("none", "noise", "sign_flip", "ipm"):
            raise ConfigurationError(f"unknown attack kind {self.kind!r}")
        if self.sigma2 < 0:
            raise ConfigurationError("sigma2 must be non-negative")
        if self.kind == "ipm" and not self.epsilon > 0:
            raise ConfigurationError("IPM epsilon must be positive")
        if self.ipm_knowledge not in ("global", "neighbors"):
            raise ConfigurationError(f"unknown ipm_knowledge {self.ipm_knowledge!r}")


def place_malicious(g: MultiDomainGraph, m: int, policy, seed: int) -> frozenset:
    """Choose ``m`` malicious nodes according to a placement policy.

    ``distributed`` walks the domains round-robin, taking one uniformly
    random node per domain per pass. The two inter-domain policies sample
    among nodes with (respectively without) an inter-domain neighbor.
    """
    policy = Placement(policy)
    if not 0 <= m < g.n_nodes:
        raise ConfigurationError(f"need 0 <= m < N, got m={m}, N={g.n_nodes}")
    rng = np.random.default_rng(seed)
    if m == 0:
        return frozenset()
    if policy is Placement.RANDOM:
        return frozenset(int(i) for i in rng.choice(g.n_nodes, size=m, replace=False))
    if policy is Placement.DISTRIBUTED:
        pools = [list(rng.permutation(g.nodes_in(d))) for d in range(g.n_domains)]
        chosen = []
        d = 0
        while len(chosen) < m:
            if pools[d]:
                chosen.append(int(pools[d].pop()))
            d = (d + 1) % g.n_domains
        return frozenset(chosen)
    want_inter = policy is Placement.INTER_DOMAIN
    pool = [i for i in range(g.n_nodes) if g.has_inter_neighbor(i) == want_inter]
    if len(pool) < m:
        raise ConfigurationError(
            f"placement policy {policy.value!r} infeasible: {len(pool)} qualifying nodes, need {m}")
    return frozenset(int(i) for i in rng.choice(pool, size=m, replace=False))


def noise_attack(u: np.ndarray, mu: float = NOISE_MU, sigma2: float = NOISE_SIGMA2,
                 seed: int = 0) -> np.ndarray:
    """Add an independent ``Normal(mu, sigma2)`` draw to every coordinate."""
    if sigma2 < 0:
        raise ConfigurationError("sigma2 must be non-negative")
    rng = np.random.default_rng(seed)
    return u + mu + np.sqrt(sigma2) * rng.standard_normal(u.shape)


def sign_flip(u: np.ndarray) -> np.ndarray:
    return -u


def ipm_attack(honest_updates: Sequence[np.ndarray], epsilon: float = IPM_EPSILON) -> np.ndarray:
    """Inner-product manipulation: ``-epsilon`` times the honest mean."""
    if len(honest_updates) == 0:
        raise ValueError("IPM needs at least one honest update")
    if not epsilon > 0:
        raise ConfigurationError("IPM epsilon must be positive")
    return -epsilon * np.mean(np.stack(honest_updates), axis=0)


def craft_shared(spec: AttackSpec, node: int, own: np.ndarray, honest: Sequence[np.ndarray],
                 seed) -> np.ndarray:
    """Shared vector of malicious ``node`` given its trained model."""
    if spec.kind == "noise":
        return noise_attack(own, spec.mu, spec.sigma2, seed=seed)
    if spec.kind == "sign_flip":
        return sign_flip(own)
    if spec.kind == "ipm":
        return ipm_attack(honest if len(honest) else [own], spec.epsilon)
    return own
