"""Synchronous-round DFL simulation with per-domain detection and bans.

One round runs, in order: local training, attack transformation of the
malicious nodes' shared vectors, sharing over ban-filtered edges,
aggregation with alert emission, domain ingestion / relay / detection /
ban decision, and accounting. Bans decided at round ``t`` filter
updates from round ``t + 1`` on.
"""
from __future__ import annotations

import copy
import json
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .. import adversary, sdn
from ..aggregation import apply_ban_filter, make_rule, trust_weighted_aggregate
from ..detectors import make_detector
from ..detectors.base import from_state_dict, state_dict
from ..errors import NonFiniteError
from ..learning import evaluate, generate_synthetic_task, init_params, local_train
from ..metrics import ConfusionCounts, round_confusion
from ..topology import generate_regular, generate_sbm, neighbors, target_degree_p1
from .config import ScenarioConfig, config_from_dict, derive_seed

# stream tags for derive_seed
_DATA, _TRAIN, _NOISE, _INIT, _PLACE, _GRAPH, _DETECT, _DETSEED = range(1, 9)


@dataclass
class RoundReport:
    round: int
    acc_mean: float
    acc_std: float
    confusion: ConfusionCounts | None
    new_bans: list
    bans: list
    scored: int
    t_train_s: float = 0.0
    t_agg_s: float = 0.0
    t_detect_s: float = 0.0
    bytes_model: int = 0
    bytes_alerts: int = 0
    bytes_coord: int = 0
    relayed: int = 0
    detect_time_per_domain: list = field(default_factory=list)

    TIMING = ("t_train_s", "t_agg_s", "t_detect_s", "detect_time_per_domain")

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        d["confusion"] = None if self.confusion is None else asdict(self.confusion)
        if not timings:
            for k in self.TIMING:
                d.pop(k)
        return d


def build_graph(cfg: ScenarioConfig):
    if cfg.topology == "regular":
        return generate_regular(cfg.n_nodes, cfg.regular_degree, derive_seed(cfg.seed, _GRAPH))
    if cfg.p1 is not None:
        p1 = cfg.p1
    else:
        p1 = target_degree_p1(max(2, round(cfg.n_nodes / cfg.n_domains)), cfg.target_degree)
    return generate_sbm(cfg.nodes_per_domain, p1, cfg.p2, derive_seed(cfg.seed, _GRAPH) % (2 ** 31))


class Simulation:
    """State of one scenario run.

    Parameters
    ----------
    cfg : ScenarioConfig
    detector_snapshot : dict, optional
        Pre-trained detector state (see :func:`pretrained_snapshot`); every
        domain starts from a copy. Computed from ``cfg`` when omitted and
        ``cfg.pretrain`` is set.
    record_alerts : bool
        Keep every round's assembled alert vectors per domain in
        ``self.alert_stream`` for offline replay.
    log : sdn.CoordinationLog, optional
        Receives every cross-domain message.
    """

    def __init__(self, cfg: ScenarioConfig, detector_snapshot=None, record_alerts=False, log=None,
                 graph=None):
        self.cfg = cfg
        self.lcfg = cfg.learner_config()
        self.graph = graph if graph is not None else build_graph(cfg)
        n = self.graph.n_nodes
        self.data = generate_synthetic_task(n, cfg.classes, cfg.in_dim, cfg.samples_per_node,
                                            derive_seed(cfg.seed, _DATA), cfg.class_sep)
        self.malicious = adversary.place_malicious(self.graph, cfg.malicious, cfg.placement,
                                                   derive_seed(cfg.seed, _PLACE))
        self.attack = adversary.AttackSpec(cfg.attack, cfg.noise_mu, cfg.noise_sigma2,
                                           cfg.ipm_epsilon, cfg.ipm_knowledge, self.malicious)
        p0 = init_params(self.lcfg, derive_seed(cfg.seed, _INIT))
        self.params = [p0.copy() for _ in range(n)]
        self.rules = [make_rule(cfg.alert_rule, **cfg.alert_params) for _ in range(n)]
        self.detecting = cfg.mitigation in ("mit", "detect")
        self.log = log
        self.record_alerts = record_alerts
        self.alert_stream: list = []

        detectors = [None] * self.graph.n_domains
        if self.detecting:
            if detector_snapshot is None:
                detector_snapshot = (pretrained_snapshot(cfg) if cfg.pretrain
                                     else state_dict(new_detector(cfg)))
            detectors = [from_state_dict(copy.deepcopy(detector_snapshot))
                         for _ in range(self.graph.n_domains)]
        self.apps = [sdn.DomainApp(d, self.graph, detectors[d], sticky=cfg.sticky_bans)
                     for d in range(self.graph.n_domains)]
        if cfg.mitigation == "ora":
            for app in self.apps:
                app.enforced = set(self.malicious)
        self.banned_ever: set = set()
        self.reports: list = []

    # -- phases -----------------------------------------------------------
    def _train(self, t):
        cfg = self.cfg
        trained = []
        for i, p in enumerate(self.params):
            try:
                trained.append(local_train(p, self.data[i], self.lcfg,
                                           seed=derive_seed(cfg.seed, _TRAIN, i, t)))
            except NonFiniteError as exc:
                raise NonFiniteError(f"{exc} at round {t}, node {i}", round=t, node=i) from exc
        honest = [i for i in range(self.graph.n_nodes) if i not in self.malicious]
        shared = list(trained)
        if self.attack.kind != "none":
            for i in sorted(self.malicious):
                if self.attack.kind == "ipm" and self.attack.ipm_knowledge == "neighbors":
                    pool = [trained[j] for j in sorted(neighbors(self.graph, i)) if j not in self.malicious]
                else:
                    pool = [trained[j] for j in honest]
                shared[i] = adversary.craft_shared(self.attack, i, trained[i], pool,
                                                   seed=derive_seed(cfg.seed, _NOISE, i, t))
        return trained, shared

    def _bans_for(self, i, t):
        if self.cfg.mitigation == "ora":
            return self.apps[self.graph.domain_of[i]].enforced
        if self.cfg.mitigation != "mit" or t < self.cfg.mitigation_start:
            return ()
        return self.apps[self.graph.domain_of[i]].enforced

    def run_round(self, t: int) -> RoundReport:
        cfg, g = self.cfg, self.graph
        t0 = time.perf_counter()
        trained, shared = self._train(t)
        t1 = time.perf_counter()

        transmissions = 0
        alerts_by_domain = [[] for _ in range(g.n_domains)]
        new_params = []
        for i in range(g.n_nodes):
            received = {j: shared[j] for j in sorted(neighbors(g, i))}
            received = apply_ban_filter(received, self._bans_for(i, t))
            transmissions += len(received)
            out = trust_weighted_aggregate(trained[i], received, t, rule=self.rules[i], rater=i)
            if not np.all(np.isfinite(out.new_params)):
                raise NonFiniteError(f"non-finite model at round {t}, node {i}", round=t, node=i)
            new_params.append(out.new_params)
            alerts_by_domain[g.domain_of[i]].extend(out.alerts)
        self.params = new_params
        t2 = time.perf_counter()

        bytes_alerts = bytes_coord = relayed = 0
        flags = None
        new_bans: list = []
        per_domain_time = []
        if self.detecting:
            for app in self.apps:
                app.start_round()
                sdn.ingest_alerts(app, alerts_by_domain[app.domain])
                bytes_alerts += sdn.ALERT_BYTES * len(alerts_by_domain[app.domain])
            relay = sdn.exchange_relays(self.apps, t, self.log)
            bytes_coord += relay["bytes"]
            relayed = relay["received"]
            flags = {}
            notices = []
            stream_row = []
            for app in self.apps:
                td = time.perf_counter()
                vectors = {j: w for j, w in sdn.assembled_vectors(app, t).items() if w}
                if self.record_alerts:
                    stream_row.append(vectors)
                rng_seed = derive_seed(cfg.seed, _DETECT, t, app.domain)
                if cfg.mitigation == "mit":
                    anomalous, batches = sdn.decide_and_ban(app, t, rng_seed)
                    notices.extend(batches)
                else:
                    _, anomalous = app.detector.round(vectors, rng_seed)
                per_domain_time.append(time.perf_counter() - td)
                flags.update({j: j in anomalous for j in vectors})
            if self.record_alerts:
                self.alert_stream.append(stream_row)
            if notices:
                bytes_coord += sdn.deliver_bans(self.apps, notices, self.log)
            if cfg.mitigation == "mit":
                current = set().union(*(app.ban_view for app in self.apps))
                new_bans = sorted(current - self.banned_ever)
                if cfg.sticky_bans:
                    for j in self.banned_ever | current:
                        flags[j] = True
                self.banned_ever |= current
        t3 = time.perf_counter()

        accs = np.array([evaluate(p, d, self.lcfg) for p, d in zip(self.params, self.data)])
        if cfg.exclude_banned_from_accuracy and self.banned_ever:
            keep = [i for i in range(g.n_nodes) if i not in self.banned_ever]
            accs = accs[keep] if keep else accs
        bans_now = sorted(set().union(*(app.enforced for app in self.apps))) if cfg.mitigation in ("mit", "ora") else []
        report = RoundReport(
            round=t, acc_mean=float(accs.mean()), acc_std=float(accs.std()),
            confusion=None if flags is None else round_confusion(flags, self.malicious),
            new_bans=new_bans, bans=bans_now, scored=0 if flags is None else len(flags),
            t_train_s=t1 - t0, t_agg_s=t2 - t1, t_detect_s=sum(per_domain_time),
            bytes_model=sdn.PARAM_BYTES * self.lcfg.dim * transmissions,
            bytes_alerts=bytes_alerts, bytes_coord=bytes_coord, relayed=relayed,
            detect_time_per_domain=per_domain_time,
        )
        report.flags = flags
        self.reports.append(report)
        return report

    def run(self):
        from .report import RunReport
        for t in range(1, self.cfg.rounds + 1):
            self.run_round(t)
        return RunReport.from_simulation(self)


def new_detector(cfg: ScenarioConfig):
    params = dict(cfg.detector_params)
    if cfg.detector in ("fuhst", "hst"):
        params.setdefault("seed", derive_seed(cfg.seed, _DETSEED) % (2 ** 31))
    return make_detector(cfg.detector, **params)


def pretraining_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Benign single-domain regular-graph setting used to warm a detector.

    The run itself uses the never-flagging ``null`` detector; it only
    produces the alert vectors that are later fed to the real detector.
    """
    return cfg.replace(name=f"{cfg.name}-pretrain", nodes_per_domain=[cfg.pretrain_nodes],
                       topology="regular", regular_degree=cfg.pretrain_degree, attack="none",
                       malicious=0, rounds=cfg.pretrain_rounds, mitigation="detect",
                       detector="null", detector_params={}, pretrain=False,
                       seed=derive_seed(cfg.seed, 99) % (2 ** 31))


def record_pretraining_stream(cfg: ScenarioConfig) -> list:
    """Assembled alert vectors of every pre-training round (single domain)."""
    pcfg = pretraining_config(cfg)
    sim = Simulation(pcfg, record_alerts=True)
    for t in range(1, pcfg.rounds + 1):
        sim.run_round(t)
    return [row[0] for row in sim.alert_stream]


def run_pretraining(detector, cfg: ScenarioConfig, stream=None):
    """Feed a benign pre-training run's alert vectors to ``detector`` in train-only mode."""
    for vectors in (stream if stream is not None else record_pretraining_stream(cfg)):
        detector.pretrain(vectors)
    return detector


_PRETRAIN_FIELDS = ("alert_rule", "alert_params", "learner", "classes", "in_dim",
                    "samples_per_node", "class_sep", "seed", "pretrain_rounds", "pretrain_nodes",
                    "pretrain_degree")


def _key(cfg: ScenarioConfig, names) -> str:
    d = cfg.to_dict()
    return json.dumps({k: d[k] for k in names}, sort_keys=True)


def _from_key(key: str) -> ScenarioConfig:
    merged = ScenarioConfig().to_dict()
    merged.update(json.loads(key))
    return config_from_dict(merged)


@lru_cache(maxsize=64)
def _cached_stream(key: str):
    return record_pretraining_stream(_from_key(key))


@lru_cache(maxsize=64)
def _cached_snapshot(key: str):
    cfg = _from_key(key)
    stream = _cached_stream(_key(cfg, _PRETRAIN_FIELDS))
    return state_dict(run_pretraining(new_detector(cfg), cfg, stream=stream))


def pretraining_stream(cfg: ScenarioConfig) -> list:
    """Memoized :func:`record_pretraining_stream`."""
    return _cached_stream(_key(cfg, _PRETRAIN_FIELDS))


def pretrained_snapshot(cfg: ScenarioConfig) -> dict:
    """State of ``cfg``'s detector after the benign pre-training phase (memoized)."""
    key = _key(cfg, _PRETRAIN_FIELDS + ("detector", "detector_params"))
    return copy.deepcopy(_cached_snapshot(key))


def run_scenario(cfg: ScenarioConfig, log=None, detector_snapshot=None):
    """Run ``cfg`` end to end and return its :class:`RunReport`."""
    return Simulation(cfg, detector_snapshot=detector_snapshot, log=log).run()
