"""Command-line entry points: simulate, evaluate, train, build-sti, replay, serve."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from .config import RunConfig
from .episodes import StiBuffer
from .motion import LatentCodec, build_ref_buffer
from .scenarios import SCENARIOS, make_scenario
from .skills import (
    AnalyticPolicy,
    ParametricPolicy,
    build_sti_buffer,
    save_training_log,
    train,
)
from .trajectory import Trajectory, load, make_header, save


def _analytic_stack(cfg: RunConfig) -> dict:
    codec = LatentCodec(cfg.latent_dim)
    return {s: AnalyticPolicy(s, codec, cfg.sim) for s in ("move", "trap", "dribble", "kick")}


def cmd_simulate(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if not args.scenario and not args.scenario_config:
        print("error: pass --scenario or --scenario-config", file=sys.stderr)
        return 2
    try:
        if args.scenario_config:
            from .scenarios import load_scenario_config, scenario_from_config

            sc_cfg = load_scenario_config(args.scenario_config)
            if args.scenario and args.scenario != sc_cfg["scenario"]:
                print("error: --scenario conflicts with the scenario config file",
                      file=sys.stderr)
                return 2
            scenario = scenario_from_config(sc_cfg, cfg.sim, record=bool(args.record))
        else:
            scenario = make_scenario(args.scenario, args.seed, cfg.sim,
                                     record=bool(args.record))
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if scenario.state is None:
        scenario.state = scenario.setup()
    state = scenario.state
    if args.ticks:
        state.tick_limit = args.ticks
    scenario.run()
    kicks = sum(1 for t in state.transitions if t.to_state == "kick")
    print(f"scenario {scenario.id}: {state.world.tick} ticks, "
          f"{len(state.transitions)} transitions ({kicks} into kick), phase={state.phase}")
    if args.record:
        header = make_header(args.seed, cfg.hash(), {
            "kind": "scenario", "scenario": args.scenario,
        })
        save(args.record, Trajectory(header, state.frames))
        print(f"recorded {len(state.frames)} frames to {args.record}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.protocol not in metrics_mod.PROTOCOLS:
        print(f"error: unknown protocol {args.protocol!r}; known: "
              f"{', '.join(sorted(metrics_mod.PROTOCOLS))}", file=sys.stderr)
        return 2
    codec = LatentCodec(cfg.latent_dim)
    policies = _analytic_stack(cfg)
    if args.policy:
        pol = ParametricPolicy.load(args.policy, codec)
        policies[pol.skill] = pol
    ref_buffer = build_ref_buffer(codec)
    reports, traj = metrics_mod.run_protocol(
        args.protocol, policies, args.seed, scale=args.scale, sim_cfg=cfg.sim,
        codec=codec, ref_buffer=ref_buffer, cfg_hash=cfg.hash(),
    )
    print(metrics_mod.reports_to_table(reports), end="")
    if args.report:
        Path(args.report).write_text(metrics_mod.reports_to_csv(reports))
        print(f"report written to {args.report}")
    if args.record and traj is not None:
        traj.header = make_header(args.seed, cfg.hash(), {
            "kind": "protocol",
            "protocol": args.protocol,
            "scale": args.scale,
            "goal_resets": [int(t) for t in _ctx_resets(traj)],
        })
        save(args.record, traj)
        print(f"trajectory written to {args.record}")
    return 0


def _ctx_resets(traj: Trajectory) -> list:
    resets = []
    prev_goal = None
    for f in traj.frames:
        g = f.players[0].goal
        if g != prev_goal:
            resets.append(f.tick)
            prev_goal = g
    return resets


def _metrics_from_file(traj: Trajectory) -> list:
    meta = traj.header.get("meta", {})
    seed = traj.header.get("seed", 0)
    cfg_hash = traj.header.get("config_hash", "none")
    if meta.get("kind") == "protocol":
        proto = meta["protocol"]
        ctx = metrics_mod.ProtocolContext(
            protocol_id=proto, seed=seed, config_hash=cfg_hash,
            goal_resets=list(meta.get("goal_resets", [])),
            measure_from_reset=metrics_mod.PROTOCOLS[proto].warmup_resets,
        )
        if proto in ("dribble-standard", "dribble-ablation"):
            return [metrics_mod.cbd(traj, ctx), metrics_mod.fbd(traj, ctx),
                    metrics_mod.dgar(traj, ctx)]
        if proto == "move-standard":
            ctx.ref_buffer = build_ref_buffer()
            return [metrics_mod.mgar(traj, ctx), metrics_mod.gmls(traj, ctx)]
    # scenario records: deterministic summary bundle
    ctx = metrics_mod.ProtocolContext(
        protocol_id=meta.get("scenario", "scenario"), seed=seed, config_hash=cfg_hash,
    )
    return [metrics_mod.cbd(traj, ctx), metrics_mod.cs(traj, ctx)]


def cmd_replay(args) -> int:
    try:
        traj = load(args.path)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.config:
        cfg = RunConfig.load(args.config)
        if cfg.hash() != traj.header.get("config_hash"):
            print("warning: config hash mismatch between file and --config", file=sys.stderr)
    print(f"replayed {len(traj.frames)} frames "
          f"(seed={traj.header.get('seed')}, config={traj.header.get('config_hash')})")
    if args.metrics:
        reports = _metrics_from_file(traj)
        out = metrics_mod.reports_to_csv(reports)
        if args.report:
            Path(args.report).write_text(out)
        else:
            print(out, end="")
    return 0


def cmd_train(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    tc = cfg.train
    tc.seed = args.seed if args.seed is not None else tc.seed
    codec = LatentCodec(cfg.latent_dim)
    buffers = {}
    for name, path in (args.buffer or []):
        buffers[name] = StiBuffer.load(path)
    ref_buffer = build_ref_buffer(codec)
    try:
        result = train(args.skill, tc, buffers=buffers or None, ref_buffer=ref_buffer,
                       sim_cfg=cfg.sim, reward_cfg=cfg.rewards)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    result.policy.save(args.out, seed=tc.seed)
    print(f"trained {args.skill}: baseline {result.baseline_fitness:.3f} -> "
          f"best {result.best_fitness:.3f}; policy written to {args.out}")
    if args.log:
        save_training_log(result.log, args.log)
        print(f"training log written to {args.log}")
    return 0


def cmd_build_sti(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    codec = LatentCodec(cfg.latent_dim)
    rng = np.random.default_rng(args.seed)
    if args.policy:
        policy = ParametricPolicy.load(args.policy, codec)
        if policy.skill != args.skill:
            print(f"error: policy file is for skill {policy.skill!r}", file=sys.stderr)
            return 2
    else:
        policy = AnalyticPolicy(args.skill, codec, cfg.sim)
    buffers = {}
    for name, path in (args.buffer or []):
        buffers[name] = StiBuffer.load(path)
    try:
        buf = build_sti_buffer(args.skill, policy, args.count, rng,
                               buffers=buffers or None, sim_cfg=cfg.sim, codec=codec)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    buf.save(args.out, seed=args.seed, cfg_hash=cfg.hash())
    print(f"built {args.skill} snapshot buffer: {len(buf)} snapshots -> {args.out}")
    return 0


def cmd_inspect_sti(args) -> int:
    try:
        buf = StiBuffer.load(args.path)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"skill={buf.source_skill} count={len(buf)}")
    with_ball = sum(1 for s in buf.snapshots if s.ball is not None)
    print(f"snapshots with ball: {with_ball}")
    if args.subsample:
        rng = np.random.default_rng(args.seed)
        sub = buf.subsample(args.subsample, rng)
        sub.save(args.out or args.path, seed=args.seed)
        print(f"subsampled to {len(sub)} -> {args.out or args.path}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    try:
        serve(args.scenario, args.port, seed=args.seed)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="footsim",
                                description="physics-based football-control sandbox")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario headless")
    s.add_argument("--scenario", choices=sorted(SCENARIOS))
    s.add_argument("--scenario-config", help="structured scenario definition file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--record", help="trajectory output path (jsonl)")
    s.add_argument("--ticks", type=int, help="override the scenario tick limit")
    s.add_argument("--config")
    s.set_defaults(fn=cmd_simulate)

    e = sub.add_parser("evaluate", help="run an evaluation protocol")
    e.add_argument("protocol")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--scale", type=float, default=1.0, help="desk-scale factor on counts")
    e.add_argument("--report", help="CSV output path")
    e.add_argument("--record", help="trajectory output path (continuous protocols)")
    e.add_argument("--policy", help="trained policy file to evaluate")
    e.add_argument("--config")
    e.set_defaults(fn=cmd_evaluate)

    t = sub.add_parser("train", help="train a skill policy")
    t.add_argument("--skill", required=True, choices=["move", "trap", "dribble", "kick"])
    t.add_argument("--config")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", required=True)
    t.add_argument("--log", help="training log CSV path")
    t.add_argument("--buffer", nargs=2, action="append", metavar=("SKILL", "PATH"),
                   help="snapshot buffer dependency (repeatable)")
    t.set_defaults(fn=cmd_train)

    b = sub.add_parser("build-sti", help="build a snapshot buffer from rollouts")
    b.add_argument("--skill", required=True, choices=["move", "trap", "dribble"])
    b.add_argument("--policy", help="policy file (defaults to the analytic controller)")
    b.add_argument("--count", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--buffer", nargs=2, action="append", metavar=("SKILL", "PATH"))
    b.add_argument("--config")
    b.set_defaults(fn=cmd_build_sti)

    i = sub.add_parser("inspect-sti", help="inspect or subsample a snapshot buffer")
    i.add_argument("path")
    i.add_argument("--subsample", type=int)
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--out")
    i.set_defaults(fn=cmd_inspect_sti)

    r = sub.add_parser("replay", help="replay a trajectory file")
    r.add_argument("path")
    r.add_argument("--metrics", action="store_true")
    r.add_argument("--report", help="CSV output path")
    r.add_argument("--config")
    r.set_defaults(fn=cmd_replay)

    v = sub.add_parser("serve", help="start the realtime session server")
    v.add_argument("--port", type=int, default=None)
    v.add_argument("--scenario", default="match", choices=sorted(SCENARIOS))
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and args.port is None:
        from .server import DEFAULT_PORT

        args.port = DEFAULT_PORT
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
