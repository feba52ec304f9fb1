"""Latent-space surrogate for the motion embedding layer.

A unit-hypersphere latent drives a fixed analytic gait decoder that stands in
for a learned low-level policy.  The first five channels carry a normalized
goal feature vector [v_x, v_y, cos(face), sin(face), speed]; channels 5..7
carry kick elevation, kick trigger/foot, and kick power.  Encoder and decoder
are built as a consistent pair so reference goals round-trip exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import PlanarVec, SpatialVec

MIN_LATENT_DIM = 8
MAX_LATENT_DIM = 64

SPEED_MAX = 7.0
FACING_RATE_MAX = 3.0
STEP_FREQ_MIN = 0.5
STEP_FREQ_MAX = 4.0
STRIKE_SPEED_MAX = 18.0
STRIKE_ELEV_MAX = math.pi / 3
KICK_TRIGGER = 0.5
FACING_GAIN = 4.0

CH_VX, CH_VY, CH_FC, CH_FS, CH_SPEED, CH_ELEV, CH_KICK, CH_POWER = range(8)


@dataclass(slots=True)
class KickSwing:
    direction: SpatialVec  # unit
    speed: float  # m/s in [0, 18]
    foot: str  # "L" | "R"


@dataclass(slots=True)
class GaitParams:
    target_speed: float  # m/s in [0, 7]
    heading: float  # rad, movement direction in the character frame
    facing_rate: float  # rad/s in [-3, 3]
    step_frequency: float  # Hz in [0.5, 4]
    step_length_scale: float  # [0, 1]
    kick_swing: KickSwing | None = None


def unit(z: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(z))
    if n < 1e-12:
        raise ValueError("cannot project zero vector onto the unit sphere")
    return z / n


@dataclass(slots=True)
class MoveRef:
    """A reference goal: horizontal movement velocity plus facing direction."""

    move_vel: PlanarVec
    face_dir: PlanarVec


@dataclass(slots=True)
class RefPair:
    name: str
    ref_goal: MoveRef
    ref_latent: np.ndarray


class LatentCodec:
    """Fixed goal<->latent map standing in for a trained encoder/decoder."""

    def __init__(self, dim: int = MIN_LATENT_DIM):
        if not MIN_LATENT_DIM <= dim <= MAX_LATENT_DIM:
            raise ValueError(f"latent dim must be in [{MIN_LATENT_DIM}, {MAX_LATENT_DIM}]")
        self.dim = dim
        self.nonunit_warnings = 0

    # -- encoding ---------------------------------------------------------

    def compose(
        self,
        move_vel: PlanarVec,
        face_dir: PlanarVec,
        kick: KickSwing | None = None,
    ) -> np.ndarray:
        """Raw (pre-normalization) feature vector for a goal or command."""
        f = np.zeros(self.dim)
        f[CH_VX] = move_vel.x
        f[CH_VY] = move_vel.y
        fn = face_dir.norm()
        if fn < 1e-9:
            raise ValueError("degenerate goal: zero facing direction")
        f[CH_FC] = face_dir.x / fn
        f[CH_FS] = face_dir.y / fn
        f[CH_SPEED] = move_vel.norm()
        if kick is not None:
            horiz = math.hypot(kick.direction.x, kick.direction.y)
            elev = math.atan2(kick.direction.z, horiz)
            f[CH_ELEV] = max(0.0, min(1.0, elev / STRIKE_ELEV_MAX))
            f[CH_KICK] = 1.0 if kick.foot == "R" else -1.0
            f[CH_POWER] = max(0.0, min(1.0, kick.speed / STRIKE_SPEED_MAX))
            # horizontal strike direction rides on the velocity channels
            if horiz > 1e-9:
                f[CH_VX] = kick.direction.x / horiz * max(f[CH_SPEED], 1.0)
                f[CH_VY] = kick.direction.y / horiz * max(f[CH_SPEED], 1.0)
        return f

    def encode(self, goal: MoveRef) -> np.ndarray:
        """Embed a movement goal on the unit hypersphere."""
        f = self.compose(goal.move_vel, goal.face_dir)
        n = float(np.linalg.norm(f))
        if n < 1e-12:
            raise ValueError("degenerate goal")
        return f / n

    def encode_command(
        self,
        move_vel: PlanarVec,
        face_dir: PlanarVec,
        kick: KickSwing | None = None,
    ) -> np.ndarray:
        return unit(self.compose(move_vel, face_dir, kick))

    # -- decoding ---------------------------------------------------------

    def decode(self, z: np.ndarray) -> GaitParams:
        """Map a unit latent to clamped gait parameters.

        Non-unit inputs are normalized first and counted as warnings.
        """
        n = float(np.linalg.norm(z))
        if abs(n - 1.0) > 1e-9:
            self.nonunit_warnings += 1
            if n < 1e-12:
                raise ValueError("cannot decode zero latent")
            z = z / n
        fnorm = math.hypot(float(z[CH_FC]), float(z[CH_FS]))
        scale = 1.0 / max(fnorm, 1e-6)
        speed = min(max(float(z[CH_SPEED]) * scale, 0.0), SPEED_MAX)
        vx, vy = float(z[CH_VX]), float(z[CH_VY])
        heading = math.atan2(vy, vx) if math.hypot(vx, vy) > 1e-12 else 0.0
        face_err = math.atan2(float(z[CH_FS]), float(z[CH_FC]))
        facing_rate = min(max(FACING_GAIN * face_err, -FACING_RATE_MAX), FACING_RATE_MAX)
        step_freq = min(max(0.6 + 0.45 * speed, STEP_FREQ_MIN), STEP_FREQ_MAX)
        step_len = min(max(speed / SPEED_MAX, 0.0), 1.0)

        kick = None
        trigger = float(z[CH_KICK]) * scale
        if abs(trigger) >= KICK_TRIGGER:
            power = min(max(abs(float(z[CH_POWER])) * scale, 0.0), 1.0)
            elev = min(max(float(z[CH_ELEV]) * scale, 0.0), 1.0) * STRIKE_ELEV_MAX
            ch, sh = math.cos(heading), math.sin(heading)
            ce, se = math.cos(elev), math.sin(elev)
            kick = KickSwing(
                direction=SpatialVec(ch * ce, sh * ce, se),
                speed=power * STRIKE_SPEED_MAX,
                foot="R" if trigger > 0 else "L",
            )
        return GaitParams(speed, heading, facing_rate, step_freq, step_len, kick)


# -- reference buffer ------------------------------------------------------

# Surrogate per-clip average velocities (m/s); mirrored takes carry slightly
# different speeds the way distinct captures do, keeping all 16 goals distinct.
_REF_SPECS: tuple[tuple[str, float, float], ...] = (
    ("forward_walk", 1.5, 0.0),
    ("forward_jog", 3.0, 0.0),
    ("forward_run", 5.0, 0.0),
    ("backward_walk", 1.2, 180.0),
    ("backward_jog", 2.5, 180.0),
    ("lateral_walk_L", 1.2, 90.0),
    ("lateral_walk_R", 1.2, -90.0),
    ("fdiag_jog_L", 3.0, 45.0),
    ("fdiag_jog_R", 3.0, -45.0),
    ("bdiag_jog_L", 2.5, 135.0),
    ("bdiag_jog_R", 2.5, -135.0),
    ("forward_walk_m", 1.6, 0.0),
    ("forward_jog_m", 3.2, 0.0),
    ("forward_run_m", 5.2, 0.0),
    ("backward_walk_m", 1.3, 180.0),
    ("backward_jog_m", 2.6, 180.0),
)


@dataclass(slots=True)
class RefBuffer:
    """The 16 reference (goal, latent) pairs used for latent guidance."""

    pairs: list[RefPair]

    def __len__(self) -> int:
        return len(self.pairs)

    def sample(self, rng) -> RefPair:
        return self.pairs[int(rng.integers(len(self.pairs)))]

    def nearest(self, move_vel: PlanarVec, face_dir: PlanarVec) -> RefPair:
        """Closest reference goal: ||dv|| plus facing angle difference in rad."""
        best, best_d = None, math.inf
        for pair in self.pairs:
            dv = pair.ref_goal.move_vel.sub(move_vel).norm()
            dot = max(-1.0, min(1.0, pair.ref_goal.face_dir.dot(face_dir)))
            d = dv + math.acos(dot)
            if d < best_d:
                best, best_d = pair, d
        assert best is not None
        return best

    def save(self, path: str | Path) -> None:
        lines = [f"footsim-refs v1 dim={len(self.pairs[0].ref_latent)} count={len(self.pairs)}"]
        for p in self.pairs:
            g = p.ref_goal
            comps = " ".join(repr(float(c)) for c in p.ref_latent)
            lines.append(
                f"{p.name} {g.move_vel.x!r} {g.move_vel.y!r} {g.face_dir.x!r} {g.face_dir.y!r} {comps}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RefBuffer":
        lines = Path(path).read_text().strip().splitlines()
        header = lines[0].split()
        if header[0] != "footsim-refs" or header[1] != "v1":
            raise ValueError(f"unrecognized reference buffer header: {lines[0]!r}")
        pairs = []
        for line in lines[1:]:
            parts = line.split()
            name = parts[0]
            vals = [float(v) for v in parts[1:]]
            pairs.append(
                RefPair(
                    name,
                    MoveRef(PlanarVec(vals[0], vals[1]), PlanarVec(vals[2], vals[3])),
                    np.array(vals[4:]),
                )
            )
        return cls(pairs)


def build_ref_buffer(codec: LatentCodec | None = None) -> RefBuffer:
    """Construct the 16-primitive reference buffer, facing fixed to +x."""
    codec = codec or LatentCodec()
    face = PlanarVec(1.0, 0.0)
    pairs = []
    for name, speed, deg in _REF_SPECS:
        theta = math.radians(deg)
        vel = PlanarVec(speed * math.cos(theta), speed * math.sin(theta))
        goal = MoveRef(vel, face)
        pairs.append(RefPair(name, goal, codec.encode(goal)))
    return RefBuffer(pairs)
