"""Watch FU-HST's per-node state evolve round by round.

A single-domain sign-flip run is simulated in detect-only mode, so the
pre-trained FU-HST instance sees every round without bans cutting the
attackers off. For one attacker and one benign node the script prints the
raw HST score, the smoothed score, the feedback memory and the high-score
counter, which shows why a single noisy round does not trigger a ban
while a persistent attacker does.

Run with ``python demos/hysteresis_walkthrough.py [seed]``.
"""
import sys

from fuhst.harness import ScenarioConfig, Simulation


def main(seed=1):
    cfg = ScenarioConfig(nodes_per_domain=[20], malicious=3, attack="sign_flip", seed=seed,
                         mitigation="detect")
    sim = Simulation(cfg)
    det = sim.apps[0].detector
    attacker = min(sim.malicious)
    benign = min(j for j in range(sim.graph.n_nodes) if j not in sim.malicious)
    print(f"tau+ {det.tau_hi:.3f}  tau- {det.tau_lo:.3f}  attacker {attacker}  benign {benign}")
    print(f"{'round':>5} | {'node':>4} {'raw':>6} {'s':>6} {'f':>6} {'c':>3} flag")
    for t in range(1, cfg.rounds + 1):
        r = sim.run_round(t)
        for j in (attacker, benign):
            if j in det.last_raw:
                print(f"{t:>5} | {j:>4} {det.last_raw[j]:>6.3f} {det.s[j]:>6.3f} {det.f[j]:>6.3f}"
                      f" {det.c[j]:>3} {'*' if r.flags.get(j) else ''}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1)
