"""Multi-domain decentralized federated learning under Byzantine attacks,
with per-domain streaming anomaly detection (FU-HST) and ban mitigation."""

__version__ = "0.1.0"
