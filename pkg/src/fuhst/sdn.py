"""Per-domain detection applications and their coordination messages.

Each domain runs one :class:`DomainApp`. It receives the alerts emitted by
its own nodes, forwards alerts about foreign nodes to their home domain,
runs its detector on the assembled alert vectors of its own nodes and
issues ban notices. Apps only interact through :class:`CoordinationBatch`
objects; none reads another app's inboxes or detector.

Wire cost model (bytes): alert message 20 (two 4-byte ids, 4-byte round,
8-byte weight), ban notice 12, model update ``8 * dim`` per directed edge.
"""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import asdict, dataclass, field

from .errors import ProtocolError
from .topology import MultiDomainGraph, neighbors

ALERT_BYTES = 20
BAN_NOTICE_BYTES = 12
PARAM_BYTES = 8


@dataclass(frozen=True)
class AlertMessage:
    rater: int
    rated: int
    round: int
    weight: float
    origin_domain: int


@dataclass(frozen=True)
class BanNotice:
    node: int
    round: int
    action: str = "ban"


@dataclass
class CoordinationBatch:
    src: int
    dst: int
    round: int
    kind: str
    messages: list = field(default_factory=list)

    def nbytes(self) -> int:
        unit = ALERT_BYTES if self.kind == "alerts" else BAN_NOTICE_BYTES
        return unit * len(self.messages)


class CoordinationLog:
    """Newline-delimited JSON record of every message that crossed a domain boundary."""

    def __init__(self):
        self.records: list = []

    def add(self, batch: CoordinationBatch) -> None:
        for msg in batch.messages:
            rec = {"round": batch.round, "from": batch.src, "to": batch.dst, "kind": batch.kind}
            rec.update(asdict(msg))
            self.records.append(rec)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


class DomainApp:
    """Detection application of one domain.

    ``ban_view`` holds this domain's own ban decisions; ``enforced`` is
    the ban list pushed to this domain's clients (own decisions plus
    notices received from peers).
    """

    def __init__(self, domain: int, graph: MultiDomainGraph, detector=None, sticky: bool = True):
        self.domain = domain
        self.graph = graph
        self.detector = detector
        self.sticky = sticky
        self.members = frozenset(graph.nodes_in(domain))
        self.inbox_local: list = []
        self.inbox_relayed: list = []
        self.relay_queue: dict = defaultdict(list)
        self.ban_view: set = set()
        self.enforced: set = set()

    def start_round(self) -> None:
        self.inbox_local.clear()
        self.inbox_relayed.clear()
        self.relay_queue.clear()

    def relay_count(self) -> int:
        return sum(len(q) for q in self.relay_queue.values())


def ingest_alerts(app: DomainApp, alerts) -> DomainApp:
    """Accept alerts emitted by this domain's nodes; queue foreign-rated ones for relay."""
    dom = app.graph.domain_of
    for a in alerts:
        if a.rater not in app.members:
            raise ProtocolError(f"domain {app.domain} received an alert from foreign node {a.rater}")
        msg = AlertMessage(a.rater, a.rated, a.round, float(a.weight), app.domain)
        dst = dom[a.rated]
        if dst == app.domain:
            app.inbox_local.append(msg)
        else:
            app.relay_queue[dst].append(msg)
    return app


def exchange_relays(apps, round: int, log: CoordinationLog | None = None) -> dict:
    """Deliver every queued cross-domain alert to its rated node's home domain.

    Returns message and byte counts for accounting.
    """
    sent = received = nbytes = 0
    batches = []
    for app in apps:
        for dst in sorted(app.relay_queue):
            msgs = [m for m in app.relay_queue[dst] if m.round == round]
            if msgs:
                batches.append(CoordinationBatch(app.domain, dst, round, "alerts", msgs))
                sent += len(msgs)
        app.relay_queue.clear()
    by_domain = {app.domain: app for app in apps}
    for b in batches:
        target = by_domain[b.dst]
        for m in b.messages:
            if m.rated not in target.members or m.origin_domain == target.domain:
                raise ProtocolError(f"misrouted relay for node {m.rated} to domain {b.dst}")
        target.inbox_relayed.extend(b.messages)
        received += len(b.messages)
        nbytes += b.nbytes()
        if log is not None:
            log.add(b)
    return {"sent": sent, "received": received, "bytes": nbytes}


def assemble_received(app: DomainApp, j: int, round: int) -> list:
    """All round-``round`` alert weights about node ``j``, local first then relayed."""
    if j not in app.members:
        raise ProtocolError(f"node {j} is not in domain {app.domain}")
    return [m.weight for m in app.inbox_local if m.rated == j and m.round == round] + \
           [m.weight for m in app.inbox_relayed if m.rated == j and m.round == round]


def assembled_vectors(app: DomainApp, round: int) -> dict:
    out = {j: [] for j in sorted(app.members)}
    for m in app.inbox_local:
        if m.round == round:
            out[m.rated].append(m.weight)
    for m in app.inbox_relayed:
        if m.round == round:
            out[m.rated].append(m.weight)
    return out


def decide_and_ban(app: DomainApp, round: int, rng_seed=0):
    """Run the detector and turn its anomalous set into ban notices.

    Returns ``(anomalous, batches)``. With sticky bans only newly banned
    nodes produce notices; in revocable mode a node stays banned only while
    flagged, and every previously banned node not flagged this round gets an
    ``unban`` notice. Notices go to every domain hosting a
    neighbor of the affected node (including this one).
    """
    vectors = {j: w for j, w in assembled_vectors(app, round).items() if w}
    _, anomalous = app.detector.round(vectors, rng_seed)
    anomalous = set(anomalous)
    if app.sticky:
        added = anomalous - app.ban_view
        removed = set()
        app.ban_view |= anomalous
    else:
        added = anomalous - app.ban_view
        removed = app.ban_view - anomalous
        app.ban_view = (app.ban_view - removed) | added
    return anomalous, ban_notices(app, round, added, removed)


def ban_notices(app: DomainApp, round: int, added, removed=()) -> list:
    per_dst = defaultdict(list)
    for action, nodes in (("ban", added), ("unban", removed)):
        for j in sorted(nodes):
            for d in sorted({app.graph.domain_of[i] for i in neighbors(app.graph, j)}):
                per_dst[d].append(BanNotice(j, round, action))
    return [CoordinationBatch(app.domain, d, round, "bans", msgs) for d, msgs in sorted(per_dst.items())]


def deliver_bans(apps, batches, log: CoordinationLog | None = None) -> int:
    """Apply ban notices to the receiving domains; returns cross-domain bytes."""
    by_domain = {app.domain: app for app in apps}
    nbytes = 0
    for b in batches:
        target = by_domain[b.dst]
        for n in b.messages:
            if n.action == "ban":
                target.enforced.add(n.node)
            else:
                target.enforced.discard(n.node)
        if b.src != b.dst:
            nbytes += b.nbytes()
            if log is not None:
                log.add(b)
    return nbytes
