"""Run the exhaustive check and (re)write the golden report.

    python scripts/run_theorem1.py --jobs 4
    python scripts/run_theorem1.py --out /tmp/report.json --seed 3
"""
import argparse
import time
from pathlib import Path

from nofinetune.theorem import CandidateSpace, Theorem1Config, verify_theorem1

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden" / "theorem1_report.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=GOLDEN)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--latent-card", type=int, default=4)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--bell-only", action="store_true")
    args = ap.parse_args()

    config = Theorem1Config(seed=args.seed, trials=args.trials, latent_card=args.latent_card,
                            space=CandidateSpace(xy_links=not args.bell_only), jobs=args.jobs)
    t0 = time.perf_counter()
    report = verify_theorem1(config)
    args.out.write_text(report.dumps())
    print(report.table())
    print(f"wrote {args.out} in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
