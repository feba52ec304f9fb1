#!/usr/bin/env python3
"""Train the four skills in dependency order and persist policies + buffers.

Desk-scale end-to-end pipeline: move -> trap (move buffer) -> dribble
(move+trap buffers) -> kick (dribble buffer).  Buffers are rolled with the
analytic controllers so the pipeline runs in minutes.
"""
import argparse
import time
from pathlib import Path

import numpy as np

from footsim.motion import LatentCodec, build_ref_buffer
from footsim.sim import SimConfig
from footsim.skills import AnalyticPolicy, TrainConfig, build_sti_buffer, save_training_log, train


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="artifacts", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iterations", type=int, default=20)
    ap.add_argument("--population", type=int, default=16)
    ap.add_argument("--buffer-count", type=int, default=500)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim_cfg = SimConfig(seed=args.seed)
    codec = LatentCodec()
    ref_buffer = build_ref_buffer(codec)
    ref_buffer.save(out / "refs.txt")
    rng = np.random.default_rng(args.seed)

    analytic = {s: AnalyticPolicy(s, codec, sim_cfg) for s in ("move", "trap", "dribble")}
    buffers = {}
    t0 = time.time()
    buffers["move"] = build_sti_buffer("move", analytic["move"], args.buffer_count, rng,
                                       sim_cfg=sim_cfg, codec=codec)
    buffers["move"].save(out / "move.sti", seed=args.seed)
    buffers["trap"] = build_sti_buffer("trap", analytic["trap"], args.buffer_count // 2, rng,
                                       buffers=buffers, sim_cfg=sim_cfg, codec=codec)
    buffers["trap"].save(out / "trap.sti", seed=args.seed)
    buffers["dribble"] = build_sti_buffer("dribble", analytic["dribble"], args.buffer_count,
                                          rng, buffers=buffers, sim_cfg=sim_cfg, codec=codec)
    buffers["dribble"].save(out / "dribble.sti", seed=args.seed)
    print(f"buffers built in {time.time() - t0:.0f}s")

    for skill in ("move", "trap", "dribble", "kick"):
        cfg = TrainConfig(
            population=args.population,
            elites=max(2, args.population // 4),
            iterations=args.iterations,
            episodes_per_candidate=2,
            episode_seconds=4.0,
            seed=args.seed,
        )
        t0 = time.time()
        res = train(skill, cfg, buffers=buffers, ref_buffer=ref_buffer, sim_cfg=sim_cfg)
        res.policy.save(out / f"{skill}.policy", seed=args.seed)
        save_training_log(res.log, out / f"{skill}_train.csv")
        print(f"{skill}: baseline {res.baseline_fitness:.2f} -> best {res.best_fitness:.2f} "
              f"({time.time() - t0:.0f}s)")


if __name__ == "__main__":
    main()
