"""Multi-domain communication graphs.

Graphs are undirected and static for a run. Nodes are numbered densely
``0..N-1`` and every node belongs to exactly one administrative domain
``0..D-1``; domains own contiguous blocks of node ids.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError

REPAIR_ATTEMPTS = 32


@dataclass(frozen=True)
class MultiDomainGraph:
    """Node/domain partition plus an undirected edge set.

    Parameters
    ----------
    n_nodes : int
        Number of nodes ``N``.
    n_domains : int
        Number of domains ``D``.
    domain_of : tuple of int
        Domain index of every node.
    edges : frozenset of (int, int)
        Unordered pairs stored as ``(min, max)``.
    """

    n_nodes: int
    n_domains: int
    domain_of: tuple
    edges: frozenset
    _adj: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if len(self.domain_of) != self.n_nodes:
            raise ConfigurationError("domain_of must list one domain per node")
        if self.n_domains < 1:
            raise ConfigurationError("at least one domain is required")
        sizes = [0] * self.n_domains
        for d in self.domain_of:
            if not 0 <= d < self.n_domains:
                raise ConfigurationError(f"domain id {d} out of range")
            sizes[d] += 1
        if any(s == 0 for s in sizes):
            raise ConfigurationError("every domain must own at least one node")
        adj = [set() for _ in range(self.n_nodes)]
        for i, j in self.edges:
            if i == j:
                raise ConfigurationError(f"self-loop on node {i}")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ConfigurationError(f"edge ({i}, {j}) references unknown node")
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @classmethod
    def from_edges(cls, domain_of: Sequence[int], edges: Iterable[tuple]) -> "MultiDomainGraph":
        domain_of = tuple(int(d) for d in domain_of)
        norm = frozenset((min(int(i), int(j)), max(int(i), int(j))) for i, j in edges)
        n_domains = max(domain_of) + 1 if domain_of else 0
        return cls(len(domain_of), n_domains, domain_of, norm)

    def nodes_in(self, d: int) -> list[int]:
        return [i for i, dd in enumerate(self.domain_of) if dd == d]

    def domain_sizes(self) -> list[int]:
        return [len(self.nodes_in(d)) for d in range(self.n_domains)]

    def degree(self, i: int) -> int:
        return len(neighbors(self, i))

    def is_inter(self, i: int, j: int) -> bool:
        return self.domain_of[i] != self.domain_of[j]

    def intra_edges(self) -> list[tuple]:
        return sorted(e for e in self.edges if not self.is_inter(*e))

    def inter_edges(self) -> list[tuple]:
        return sorted(e for e in self.edges if self.is_inter(*e))

    def has_inter_neighbor(self, i: int) -> bool:
        return any(self.is_inter(i, j) for j in self._adj[i])


def neighbors(g: MultiDomainGraph, i: int) -> frozenset:
    """Return the neighbor set of node ``i``.

    The graph is undirected, so this is also the set of raters of ``i``.
    """
    if not isinstance(i, (int, np.integer)) or not 0 <= i < g.n_nodes:
        raise IndexError(f"invalid node id {i!r} for a graph of {g.n_nodes} nodes")
    return g._adj[int(i)]


def target_degree_p1(n_in_domain: int, target_degree: float) -> float:
    """Intra-domain edge probability giving an expected degree of ``target_degree``."""
    if n_in_domain < 2:
        raise ConfigurationError("a domain needs at least two nodes to target a degree")
    return float(min(1.0, max(0.0, target_degree / (n_in_domain - 1))))


def _domain_assignment(nodes_per_domain: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(nodes_per_domain)), nodes_per_domain)


def _draw_sbm(dom: np.ndarray, p1: float, p2: float, rng: np.random.Generator) -> np.ndarray:
    n = len(dom)
    same = dom[:, None] == dom[None, :]
    probs = np.where(same, p1, p2)
    u = rng.random((n, n))
    upper = np.triu(u < probs, k=1)
    return upper | upper.T


def generate_sbm(nodes_per_domain: Sequence[int], p1: float, p2: float, seed: int,
                 repair: bool = True) -> MultiDomainGraph:
    """Draw a ``D``-block stochastic block model graph.

    Same-domain pairs are linked with probability ``p1`` and cross-domain
    pairs with probability ``p2``. If a draw leaves isolated nodes it is
    re-drawn with ``seed + k`` (up to 32 attempts); remaining isolated nodes
    are then attached to one uniformly random peer, chosen among same-domain
    nodes when ``p1 > 0`` and otherwise among other-domain nodes when
    ``p2 > 0``, so zero-probability edge classes stay empty.
    """
    sizes = [int(s) for s in nodes_per_domain]
    if not sizes:
        raise ConfigurationError("at least one domain is required")
    if any(s <= 0 for s in sizes):
        raise ConfigurationError(f"empty domain block in {sizes}")
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 <= p <= 1.0:
            raise ConfigurationError(f"{name}={p} is not a probability")
    dom = _domain_assignment(sizes)
    n = len(dom)

    attempts = REPAIR_ATTEMPTS if repair else 1
    for k in range(attempts):
        adj = _draw_sbm(dom, p1, p2, np.random.default_rng(seed + k))
        if not repair or adj.any(axis=1).all():
            break

    if repair:
        rng = np.random.default_rng([seed, REPAIR_ATTEMPTS])
        for i in np.flatnonzero(~adj.any(axis=1)):
            if adj[i].any():
                continue  # linked by an earlier repair
            if p1 > 0:
                peers = np.flatnonzero((dom == dom[i]) & (np.arange(n) != i))
            elif p2 > 0:
                peers = np.flatnonzero(dom != dom[i])
            else:
                peers = np.array([], dtype=int)
            if len(peers):
                j = int(rng.choice(peers))
                adj[i, j] = adj[j, i] = True

    ii, jj = np.nonzero(np.triu(adj, k=1))
    edges = frozenset(zip(ii.tolist(), jj.tolist()))
    return MultiDomainGraph(n, len(sizes), tuple(dom.tolist()), edges)


def generate_regular(n: int, k: int, seed: int, max_restarts: int = 1000) -> MultiDomainGraph:
    """Draw a single-domain ``k``-regular graph on ``n`` nodes.

    Stubs are paired one at a time, rejecting pairs that would form a
    self-loop or a repeated edge; a dead end restarts the pairing from a
    fresh seeded stream.
    """
    if k < 0 or n < 1 or k >= n:
        raise ConfigurationError(f"need 0 <= k < n, got n={n}, k={k}")
    if (n * k) % 2:
        raise ConfigurationError(f"no {k}-regular graph on {n} nodes: n*k is odd")
    for attempt in range(max_restarts):
        rng = np.random.default_rng([seed, attempt])
        edges = _pair_stubs(n, k, rng)
        if edges is not None:
            return MultiDomainGraph(n, 1, (0,) * n, frozenset(edges))
    raise ConfigurationError(f"failed to build a {k}-regular graph on {n} nodes")


def _pair_stubs(n: int, k: int, rng: np.random.Generator):
    stubs = [i for i in range(n) for _ in range(k)]
    edges = set()
    while stubs:
        order = rng.permutation(len(stubs))
        paired = False
        # first admissible pair in a random scan; restart if none exists
        for a_pos in range(len(order)):
            a = stubs[order[a_pos]]
            for b_pos in range(a_pos + 1, len(order)):
                b = stubs[order[b_pos]]
                e = (min(a, b), max(a, b))
                if a != b and e not in edges:
                    edges.add(e)
                    for pos in sorted((order[a_pos], order[b_pos]), reverse=True):
                        stubs.pop(pos)
                    paired = True
                    break
            if paired:
                break
        if not paired:
            return None
    return edges


def dump_graph(g: MultiDomainGraph, path) -> None:
    """Write ``g`` as a text edge list: ``N D``, the domain row, then ``i j`` lines."""
    lines = [f"{g.n_nodes} {g.n_domains}", " ".join(str(d) for d in g.domain_of)]
    lines += [f"{i} {j}" for i, j in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_graph(path) -> MultiDomainGraph:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    try:
        n, d = (int(v) for v in text[0].split())
        domain_of = tuple(int(v) for v in text[1].split()) if n else ()
        edges = [tuple(int(v) for v in line.split()) for line in text[2:] if line.strip()]
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"malformed graph file {path}: {exc}") from exc
    if len(domain_of) != n or any(len(e) != 2 for e in edges):
        raise ConfigurationError(f"malformed graph file {path}")
    norm = frozenset((min(i, j), max(i, j)) for i, j in edges)
    return MultiDomainGraph(n, d, domain_of, norm)
