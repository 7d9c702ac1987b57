"""Sampled particle paths, canonical geometries and subtended angles."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

DEFAULT_SAMPLES = 1000
_CLOSE_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stamped samples (t_i, r_i, v_i) of a planar path.

    Arrays are read-only.  Segment-wise quantities (angles, line integrals)
    treat the path as the polyline through the sample points.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    closed: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = _frozen(self.times)
        r = _frozen(self.positions)
        v = _frozen(self.velocities)
        if t.ndim != 1 or r.shape != (t.size, 2) or v.shape != (t.size, 2):
            raise ValueError(f"inconsistent sample shapes {t.shape}, {r.shape}, {v.shape}")
        if t.size < 2:
            raise GeometryError("a trajectory needs at least two samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.closed and np.max(np.abs(r[0] - r[-1])) > _CLOSE_TOL * max(1.0, np.max(np.abs(r))):
            raise GeometryError("closed trajectory does not return to its start")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", r)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self):
        return self.times.size

    @property
    def start(self) -> np.ndarray:
        return self.positions[0]

    @property
    def end(self) -> np.ndarray:
        return self.positions[-1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def label(self) -> str:
        return str(self.metadata.get("label", self.metadata.get("kind", "path")))

    def segments(self):
        """Pairs (r_i, r_{i+1}) as two arrays of shape (N-1, 2)."""
        return self.positions[:-1], self.positions[1:]

    def reversed(self) -> "Trajectory":
        t = self.times[-1] + self.times[0] - self.times[::-1]
        meta = dict(self.metadata, reversed=not self.metadata.get("reversed", False))
        return Trajectory(t, self.positions[::-1], -self.velocities[::-1], self.closed, meta)

    def retimed(self, factor: float) -> "Trajectory":
        """Same geometric path traversed ``factor`` times slower."""
        if factor <= 0:
            raise ValueError("retiming factor must be positive")
        t = self.times[0] + (self.times - self.times[0]) * factor
        return Trajectory(t, self.positions, self.velocities / factor, self.closed, dict(self.metadata))

    def interpolate(self, times) -> "Trajectory":
        """Linear interpolation of positions and velocities at new ``times``."""
        times = np.asarray(times, dtype=float)
        if times[0] < self.times[0] or times[-1] > self.times[-1]:
            raise ValueError("interpolation times outside the trajectory span")
        pos = np.stack([np.interp(times, self.times, self.positions[:, k]) for k in (0, 1)], axis=-1)
        vel = np.stack([np.interp(times, self.times, self.velocities[:, k]) for k in (0, 1)], axis=-1)
        return Trajectory(times, pos, vel, False, dict(self.metadata, resampled=True))

    def to_table(self, delimiter: str = "\t") -> str:
        data = np.column_stack([self.times, self.positions, self.velocities])
        buf = io.StringIO()
        np.savetxt(buf, data, fmt="%.17g", delimiter=delimiter, header=delimiter.join(["t", "x", "y", "vx", "vy"]),
                   comments="")
        return buf.getvalue()

    @classmethod
    def from_table(cls, text: str, delimiter: str = "\t", closed: bool = False, metadata=None) -> "Trajectory":
        data = np.loadtxt(io.StringIO(text), delimiter=delimiter, skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1:3], data[:, 3:5], closed, metadata or {"kind": "imported"})


def straight_path(start, end, speed: float, n: int = DEFAULT_SAMPLES, t0: float = 0.0,
                  label: str = "straight") -> Trajectory:
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = float(np.hypot(*(end - start)))
    if length == 0.0:
        raise GeometryError("straight path needs distinct endpoints")
    if speed <= 0:
        raise ValueError("speed must be positive")
    if n < 2:
        raise ValueError("need at least two samples")
    s = np.linspace(0.0, 1.0, n)
    pos = start + s[:, None] * (end - start)
    pos[-1] = end
    vel = np.broadcast_to((end - start) * (speed / length), pos.shape)
    return Trajectory(t0 + s * length / speed, pos, vel, False,
                      {"kind": "straight", "label": label, "start": start.tolist(), "end": end.tolist(),
                       "speed": speed})


def arc_path(center, radius: float, theta_start: float, theta_end: float, speed: float,
             n: int = DEFAULT_SAMPLES, t0: float = 0.0) -> Trajectory:
    """Circular arc; ``theta_end - theta_start`` may exceed 2 pi (several windings)."""
    if radius <= 0:
        raise GeometryError("arc radius must be positive")
    if speed <= 0:
        raise ValueError("speed must be positive")
    sweep = theta_end - theta_start
    if sweep == 0:
        raise GeometryError("arc has zero angular extent")
    center = np.asarray(center, dtype=float)
    theta = np.linspace(theta_start, theta_end, n)
    pos = center + radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    sense = np.sign(sweep)
    vel = speed * sense * np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
    turns = sweep / (2 * np.pi)
    closed = abs(turns - round(turns)) < 1e-12 and round(turns) != 0
    if closed:
        pos[-1] = pos[0]
    t = t0 + np.abs(theta - theta_start) * radius / speed
    return Trajectory(t, pos, vel, closed,
                      {"kind": "arc", "center": center.tolist(), "radius": radius,
                       "theta_start": theta_start, "theta_end": theta_end, "speed": speed})


def circle_path(center, radius: float, speed: float = 1.0, windings: int = 1, n: int = DEFAULT_SAMPLES,
                phase: float = 0.0) -> Trajectory:
    """Closed circle(s); negative ``windings`` run clockwise."""
    return arc_path(center, radius, phase, phase + 2 * np.pi * windings, speed, n)


def parametric_path(position_fn, velocity_fn, t_start: float, t_end: float, n: int = DEFAULT_SAMPLES,
                    closed: bool = False, label: str = "parametric") -> Trajectory:
    """Sample a smooth path given position and velocity as functions of time (vectorized)."""
    t = np.linspace(t_start, t_end, n)
    pos = np.asarray(position_fn(t), dtype=float)
    vel = np.asarray(velocity_fn(t), dtype=float)
    if closed:
        pos = pos.copy()
        pos[-1] = pos[0]
    return Trajectory(t, pos, vel, closed, {"kind": "parametric", "label": label})


def concatenate(first: Trajectory, second: Trajectory) -> Trajectory:
    """Join two paths end to start; the second is shifted in time to follow the first."""
    if np.max(np.abs(first.end - second.start)) > _CLOSE_TOL * max(1.0, np.max(np.abs(first.end))):
        raise GeometryError("paths do not join")
    dt = first.times[-1] - second.times[0]
    t = np.concatenate([first.times, second.times[1:] + dt])
    pos = np.concatenate([first.positions, second.positions[1:]])
    vel = np.concatenate([first.velocities[:-1], 0.5 * (first.velocities[-1:] + second.velocities[:1]),
                          second.velocities[1:]])
    closed = bool(np.max(np.abs(pos[0] - pos[-1])) <= _CLOSE_TOL * max(1.0, np.max(np.abs(pos))))
    if closed:
        pos[-1] = pos[0]
    return Trajectory(t, pos, vel, closed, {"kind": "concatenated", "parts": [first.label, second.label]})


def segment_angles(positions, about) -> np.ndarray:
    """Signed angle increments (counterclockwise positive) of each polyline segment seen from ``about``.

    Exact per straight segment.  Raises GeometryError if a segment passes
    through ``about``.
    """
    d = np.asarray(positions, dtype=float) - np.asarray(about, dtype=float)
    p0, p1 = d[:-1], d[1:]
    cross = p0[:, 0] * p1[:, 1] - p0[:, 1] * p1[:, 0]
    dot = p0[:, 0] * p1[:, 0] + p0[:, 1] * p1[:, 1]
    seg = p1 - p0
    seg_len2 = np.einsum("ij,ij->i", seg, seg)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.clip(-np.einsum("ij,ij->i", p0, seg) / seg_len2, 0.0, 1.0)
    s = np.where(seg_len2 > 0, s, 0.0)
    closest = p0 + s[:, None] * seg
    dmin = np.hypot(closest[:, 0], closest[:, 1])
    scale = np.maximum(np.hypot(p0[:, 0], p0[:, 1]), np.hypot(p1[:, 0], p1[:, 1]))
    if np.any(dmin <= 1e-12 * np.maximum(scale, 1e-300)):
        i = int(np.argmin(dmin / np.maximum(scale, 1e-300)))
        raise GeometryError(f"path passes through {tuple(np.asarray(about, float))} on segment {i}")
    return np.arctan2(cross, dot)


def subtended_angle(traj: Trajectory, about) -> float:
    """Accumulated signed winding angle of ``traj`` about the point ``about``."""
    return float(np.sum(segment_angles(traj.positions, about)))


def winding_number(traj: Trajectory, about) -> int:
    if not traj.closed:
        raise GeometryError("winding number needs a closed trajectory")
    return int(round(subtended_angle(traj, about) / (2 * np.pi)))


def two_path_geometry(source1, source2, screen_point, tube_center, n: int = DEFAULT_SAMPLES,
                      speed: float = 1.0):
    """Straight rays S1 -> x and S2 -> x of the loopless interferometer.

    Returns ``(path1, path2, dtheta)`` with dtheta the difference of the two
    rays' subtended angles about the tube; for rays that close into a loop
    with a source-side segment it is the wedge S1 -> x -> S2 seen from the tube.
    """
    s1, s2, x = (np.asarray(p, dtype=float) for p in (source1, source2, screen_point))
    if np.array_equal(s1, s2):
        raise GeometryError("the two sources coincide")
    if np.array_equal(s1, x) or np.array_equal(s2, x):
        raise GeometryError("screen point coincides with a source")
    p1 = straight_path(s1, x, speed, n, label="S1->x")
    p2 = straight_path(s2, x, speed, n, label="S2->x")
    dtheta = subtended_angle(p1, tube_center) - subtended_angle(p2, tube_center)
    return p1, p2, dtheta
