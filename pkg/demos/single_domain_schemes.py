"""Compare mitigation schemes on the three single-domain presets.

For each of s1 (noise), s2 (IPM-100) and s3 (sign flip) the script runs
NoAction, Mitigate with FU-HST and Oracle on a handful of seeds and prints
the round-10 and round-20 accuracy snapshots together with FU-HST's
detection quality.

Run with ``python demos/single_domain_schemes.py [n_seeds]``.
"""
import sys

import numpy as np

from fuhst.harness import preset, run_scenario


def main(n_seeds=3):
    print(f"{'preset':<7}{'scheme':<8}{'acc@R10':>10}{'acc@R20':>10}{'F1':>8}{'FBR':>8}")
    for name in ("s1", "s2", "s3"):
        for scheme in ("na", "mit", "ora"):
            runs = [run_scenario(preset(name, mitigation=scheme, seed=s)) for s in range(n_seeds)]
            r10 = np.mean([r.snapshots["R10"]["mean"] for r in runs])
            r20 = np.mean([r.snapshots["R20"]["mean"] for r in runs])
            if scheme == "mit":
                f1 = np.mean([r.detection["f1"] for r in runs])
                fbr = np.mean([r.detection["fbr"] for r in runs])
                extra = f"{f1:>8.3f}{fbr:>8.3f}"
            else:
                extra = f"{'-':>8}{'-':>8}"
            print(f"{name:<7}{scheme:<8}{r10:>10.3f}{r20:>10.3f}{extra}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
