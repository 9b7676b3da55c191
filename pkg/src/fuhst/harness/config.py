"""Scenario configuration, YAML loading and the Table-I presets."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from ..errors import ConfigurationError
from ..learning import LearnerConfig

SCHEMES = ("na", "mit", "ora", "detect")
SCHEME_ALIASES = {"noaction": "na", "no_action": "na", "mitigate": "mit", "oracle": "ora",
                  "detect_only": "detect"}


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one run.

    ``nodes_per_domain`` fixes ``N`` and ``D``. The intra-domain edge
    probability is ``p1`` when given, otherwise it targets an expected
    degree of ``target_degree`` in every domain. ``topology="regular"``
    ignores the SBM fields and builds a single-domain
    ``regular_degree``-regular graph.

    ``mitigation`` is one of ``na`` (no detection), ``mit`` (detect and
    ban), ``ora`` (ban the true malicious set from round 1) or
    ``detect`` (detect and score, never ban).
    """

    name: str = "custom"
    nodes_per_domain: list = field(default_factory=lambda: [20])
    topology: str = "sbm"
    p1: float | None = None
    target_degree: float = 8.0
    p2: float = 0.0
    regular_degree: int = 8
    attack: str = "none"
    noise_mu: float = 0.1
    noise_sigma2: float = 0.1
    ipm_epsilon: float = 100.0
    ipm_knowledge: str = "global"
    placement: str = "random"
    malicious: int = 0
    rounds: int = 20
    detector: str = "fuhst"
    detector_params: dict = field(default_factory=dict)
    alert_rule: str = "trust_gauss"
    alert_params: dict = field(default_factory=dict)
    mitigation: str = "mit"
    mitigation_start: int = 1
    sticky_bans: bool = True
    pretrain: bool = True
    pretrain_rounds: int = 15
    pretrain_nodes: int = 20
    pretrain_degree: int = 8
    learner: dict = field(default_factory=dict)
    classes: int = 4
    in_dim: int = 16
    samples_per_node: int = 120
    class_sep: float = 3.0
    exclude_banned_from_accuracy: bool = False
    seed: int = 0

    def __post_init__(self):
        self.mitigation = SCHEME_ALIASES.get(str(self.mitigation).lower(), str(self.mitigation).lower())
        self.validate()

    @property
    def n_nodes(self) -> int:
        return int(sum(self.nodes_per_domain))

    @property
    def n_domains(self) -> int:
        return len(self.nodes_per_domain)

    def learner_config(self) -> LearnerConfig:
        params = dict(self.learner)
        params.setdefault("in_dim", self.in_dim)
        params.setdefault("classes", self.classes)
        try:
            return LearnerConfig(**params)
        except TypeError as exc:
            raise ConfigurationError(f"bad learner parameters: {exc}") from None

    def validate(self) -> None:
        if not self.nodes_per_domain or any(int(n) < 1 for n in self.nodes_per_domain):
            raise ConfigurationError("nodes_per_domain needs at least one non-empty domain")
        if self.topology not in ("sbm", "regular"):
            raise ConfigurationError(f"unknown topology {self.topology!r}")
        if self.topology == "regular" and self.n_domains != 1:
            raise ConfigurationError("regular topology is single-domain")
        if not 0 <= self.malicious < self.n_nodes:
            raise ConfigurationError(f"need 0 <= malicious < N, got {self.malicious}")
        if self.mitigation not in SCHEMES:
            raise ConfigurationError(f"unknown mitigation scheme {self.mitigation!r}")
        if self.rounds < 1:
            raise ConfigurationError("rounds must be positive")
        if self.mitigation_start < 1:
            raise ConfigurationError("mitigation_start must be >= 1")
        for p in (self.p1, self.p2):
            if p is not None and not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"edge probability {p} outside [0, 1]")
        self.learner_config()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def config_from_dict(data: dict) -> ScenarioConfig:
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {unknown}")
    return ScenarioConfig(**data)


def load_config(path) -> ScenarioConfig:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: expected a mapping at top level")
    if "preset" in data:
        base = preset(data.pop("preset")).to_dict()
        unknown = sorted(set(data) - set(base))
        if unknown:
            raise ConfigurationError(f"unknown configuration keys: {unknown}")
        base.update(data)
        data = base
    return config_from_dict(data)


def dump_config(cfg: ScenarioConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False), encoding="utf-8")


def split_nodes(n: int, d: int) -> list:
    base, extra = divmod(n, d)
    return [base + (1 if k < extra else 0) for k in range(d)]


_TABLE = {
    "s1": dict(d=1, n=20, m=3, p2=0.0, placement="random", attack="noise"),
    "s2": dict(d=1, n=20, m=3, p2=0.0, placement="random", attack="ipm"),
    "s3": dict(d=1, n=20, m=3, p2=0.0, placement="random", attack="sign_flip"),
    "s4": dict(d=2, n=40, m=4, p2=0.02, placement="distributed", attack="sign_flip"),
    "s5": dict(d=2, n=40, m=4, p2=0.02, placement="distributed", attack="ipm"),
    "s6": dict(d=3, n=40, m=3, p2=0.03, placement="inter_domain_attacks", attack="sign_flip"),
    "s7": dict(d=3, n=40, m=3, p2=0.03, placement="inter_domain_attacks", attack="ipm"),
    "s8": dict(d=3, n=40, m=3, p2=0.03, placement="no_inter_domain_attacks", attack="ipm"),
}

PRESET_NAMES = tuple(_TABLE)


def preset(name: str, **overrides) -> ScenarioConfig:
    """Scenario preset ``s1`` .. ``s8``; ``overrides`` replace individual fields."""
    key = str(name).lower()
    if key not in _TABLE:
        raise ConfigurationError(f"unknown preset {name!r}; known: {list(_TABLE)}")
    row = _TABLE[key]
    cfg = dict(name=key, nodes_per_domain=split_nodes(row["n"], row["d"]), p2=row["p2"],
               placement=row["placement"], attack=row["attack"], malicious=row["m"])
    cfg.update(overrides)
    return config_from_dict(cfg)


def describe_presets() -> list:
    rows = []
    for key, row in _TABLE.items():
        attack = {"noise": "Noise", "ipm": "IPM-100", "sign_flip": "Sign-Flipping"}[row["attack"]]
        rows.append(f"{key}: D={row['d']} (N,M)=({row['n']},{row['m']}) p2={row['p2']} "
                    f"placement={row['placement']} attack={attack}")
    return rows


def derive_seed(*keys) -> int:
    """Deterministic 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])
