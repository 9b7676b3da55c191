"""Common detector surface, registry and state snapshots.

A detector consumes, once per round, the alert weights each rated node
received and returns per-node scores plus the anomalous set. Snapshots are
numpy ``.npz`` archives: array-valued state entries are stored under their
own keys and everything else goes into a JSON header under ``__header__``::

    {"format": "fuhst-detector-state", "version": 1, "fields": {...}}
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError

STATE_FORMAT = "fuhst-detector-state"
STATE_VERSION = 1

DETECTORS: dict = {}


class Detector:
    name = "base"

    def round(self, received, rng_seed=0):
        raise NotImplementedError

    def pretrain(self, received) -> None:
        raise NotImplementedError

    def to_state(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_state(cls, state: dict) -> "Detector":
        raise NotImplementedError


def register(cls):
    DETECTORS[cls.name] = cls
    return cls


def make_detector(name: str, **params) -> Detector:
    try:
        cls = DETECTORS[name]
    except KeyError:
        raise ConfigurationError(f"unknown detector {name!r}; known: {sorted(DETECTORS)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for detector {name!r}: {exc}") from None


def _split(state: dict, prefix=""):
    arrays, fields = {}, {}
    for k, v in state.items():
        if isinstance(v, np.ndarray):
            arrays[prefix + k] = v
        elif isinstance(v, dict):
            sub_arrays, sub_fields = _split(v, prefix + k + "/")
            arrays.update(sub_arrays)
            fields[k] = sub_fields
        else:
            fields[k] = v
    return arrays, fields


def _join(fields: dict, arrays, prefix=""):
    out = {}
    for k, v in fields.items():
        out[k] = _join(v, arrays, prefix + k + "/") if isinstance(v, dict) else v
    for key in arrays:
        if key.startswith(prefix) and "/" not in key[len(prefix):]:
            out[key[len(prefix):]] = np.asarray(arrays[key])
    return out


def state_dict(det: Detector) -> dict:
    return {"name": det.name, "state": det.to_state()}


def from_state_dict(snap: dict) -> Detector:
    try:
        cls = DETECTORS[snap["name"]]
    except KeyError:
        raise ConfigurationError(f"unknown detector {snap.get('name')!r} in snapshot") from None
    return cls.from_state(snap["state"])


def save_state(det: Detector, path) -> None:
    """Write a versioned snapshot of ``det`` to ``path`` (``.npz``)."""
    arrays, fields = _split(state_dict(det))
    header = {"format": STATE_FORMAT, "version": STATE_VERSION, "fields": fields}
    with open(path, "wb") as fh:
        np.savez(fh, __header__=np.array(json.dumps(header, sort_keys=True)), **arrays)


def load_state(path) -> Detector:
    with np.load(Path(path), allow_pickle=False) as z:
        header = json.loads(str(z["__header__"]))
        if header.get("format") != STATE_FORMAT:
            raise ConfigurationError(f"{path} is not a detector snapshot")
        if header.get("version") != STATE_VERSION:
            raise ConfigurationError(f"unsupported snapshot version {header.get('version')}")
        arrays = {k: z[k] for k in z.files if k != "__header__"}
    return from_state_dict(_join(header["fields"], arrays))


@register
class NullDetector(Detector):
    """Never flags anything; used to collect alert streams without decisions."""

    name = "null"

    def round(self, received, rng_seed=0):
        return {j: 0.0 for j in received}, set()

    def pretrain(self, received):
        pass

    def to_state(self):
        return {}

    @classmethod
    def from_state(cls, state):
        return cls()
