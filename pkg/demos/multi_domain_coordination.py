"""Follow the inter-domain coordination traffic of one multi-domain run.

Preset s6 places three sign-flipping attackers on nodes with neighbors in
other domains, so every detection depends on alerts relayed between the
three SDN applications. The script prints, per round, how many alerts
were relayed, which nodes were banned, and the byte overhead relative to
the model exchange.

Run with ``python demos/multi_domain_coordination.py [seed]``.
"""
import sys
from collections import Counter

from fuhst.harness import Simulation, preset
from fuhst.harness.report import RunReport
from fuhst.sdn import CoordinationLog


def main(seed=0):
    cfg = preset("s6", seed=seed)
    log = CoordinationLog()
    sim = Simulation(cfg, log=log)
    print(f"malicious nodes: {sorted(sim.malicious)}")
    print(f"inter-domain edges: {len(sim.graph.inter_edges())}")
    for t in range(1, cfg.rounds + 1):
        r = sim.run_round(t)
        kinds = Counter(rec["kind"] for rec in log.records if rec["round"] == t)
        line = (f"round {t:>2}: acc {r.acc_mean:.3f}  relayed alerts {kinds.get('alerts', 0):>3}"
                f"  ban notices {kinds.get('bans', 0)}")
        if r.new_bans:
            line += f"  new bans {sorted(r.new_bans)}"
        print(line)
    report = RunReport.from_simulation(sim)
    o = report.overhead
    print(f"F1 {report.detection['f1']:.3f}, mean per-round FBR {report.detection['fbr']:.3f}")
    print(f"detection bytes per round {o['detection_bytes']:.0f} vs model bytes {o['model_bytes']:.0f}"
          f" (ratio {o['bytes_ratio']:.4f})")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
