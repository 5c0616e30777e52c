"""CHSH tests in a fixed cyclic interferometer driven by input-state choices.

The 2d+2 photons are ordered around the ring as

    x_{i,1} ... x_{i,d}, w1, y_{j,1} ... y_{j,d}, w2

Alice picks the sequence ``x_i`` and Bob the sequence ``y_j``; w1 and w2
are fixed shared photons.  With total phase 0 the postselected parity
correlator for settings (i, j) is Re V_ij, V_ij being the cyclic overlap
product of the sequence above.

Each setting sequence samples a trajectory on the Bloch sphere from w2
to w1 (Alice) or w1 to w2 (Bob):

* ``x2``/``y2``: the two halves of the horizontal circle at latitude
  cos(theta), through (0, +sin theta, cos theta) and (0, -sin theta,
  cos theta) respectively.
* ``x1``: the circle through w2, (0, -sin(theta/3), cos(theta/3)) and w1.
* ``y1``: x1 reversed and mirrored through y -> -y, so it passes through
  (0, +sin(theta/3), cos(theta/3)).

Points are taken at equal parameter steps k*pi/(d+1), which gives equal
overlaps between neighbours on each trajectory.  As d grows every
visibility tends to 1 while the enclosed solid angles stay fixed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInputError
from .states import (
    BlochVector,
    GeometricFactor,
    PureState,
    bloch_to_kets,
    cyclic_overlap,
)

SETTINGS = ((1, 1), (1, 2), (2, 1), (2, 2))
THETA_OPT = math.acos(0.25)
_T_TOL = 1e-12
_MIRROR_Y = np.array([1.0, -1.0, 1.0])


@dataclass(frozen=True)
class TrajectoryParams:
    """Latitude angle theta in [0, pi/2] and photons per party d >= 1.

    theta = 0 is accepted as the degenerate limit where every state sits
    at the north pole.
    """

    theta: float
    d: int

    def __post_init__(self):
        theta = float(self.theta)
        if not (0.0 <= theta <= math.pi / 2 + 1e-15):
            raise InvalidInputError("theta must lie in [0, pi/2]")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError("d must be a positive integer")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "d", int(self.d))

    @property
    def n_photons(self) -> int:
        return 2 * self.d + 2


@dataclass(frozen=True)
class SettingSequences:
    alice: tuple[tuple[PureState, ...], tuple[PureState, ...]]
    bob: tuple[tuple[PureState, ...], tuple[PureState, ...]]
    w1: PureState
    w2: PureState

    def cycle(self, i: int, j: int) -> list[PureState]:
        """Photon states in ring order for settings (i, j)."""
        _check_setting(i, j)
        return [*self.alice[i - 1], self.w1, *self.bob[j - 1], self.w2]


@dataclass(frozen=True)
class ChshReport:
    v: np.ndarray = field(repr=False)
    correlators: np.ndarray
    i_chsh: float

    def factor(self, i: int, j: int) -> GeometricFactor:
        return GeometricFactor(complex(self.v[i - 1, j - 1]))


def _check_setting(i: int, j: int) -> None:
    if i not in (1, 2) or j not in (1, 2):
        raise InvalidInputError("settings are labelled 1 and 2")


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < -_T_TOL) or np.any(arr > math.pi + _T_TOL):
        raise InvalidInputError("trajectory parameter must lie in [0, pi]")
    return np.clip(arr, 0.0, math.pi)


def anchors(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors of the shared photons (w1, w2)."""
    s, c = math.sin(theta), math.cos(theta)
    return np.array([-s, 0.0, c]), np.array([s, 0.0, c])


def x1_midpoint(theta: float) -> np.ndarray:
    return np.array([0.0, -math.sin(theta / 3), math.cos(theta / 3)])


def _x2_points(theta: float, t: np.ndarray) -> np.ndarray:
    s, c = math.sin(theta), math.cos(theta)
    return np.stack([s * np.cos(t), s * np.sin(t), np.full_like(t, c)], axis=-1)


def _y2_points(theta: float, t: np.ndarray) -> np.ndarray:
    s, c = math.sin(theta), math.cos(theta)
    return np.stack([-s * np.cos(t), -s * np.sin(t), np.full_like(t, c)], axis=-1)


@lru_cache(maxsize=4096)
def _x1_circle(theta: float):
    """Circle through w2, the x1 midpoint and w1.

    Returns (center, e1, e2, radius, arc) such that
    x1(t) = center + radius * (cos(t*arc/pi) e1 + sin(t*arc/pi) e2).
    """
    w1, w2 = anchors(theta)
    mid = x1_midpoint(theta)
    normal = np.cross(mid - w2, w1 - w2)
    norm = np.linalg.norm(normal)
    if theta < 1e-9 or norm < 1e-300:
        return None
    normal /= norm
    center = float(np.dot(w2, normal)) * normal
    radius = float(np.linalg.norm(w2 - center))
    e1 = (w2 - center) / radius
    e2 = np.cross(normal, e1)

    def angle(p):
        rel = p - center
        return math.atan2(float(np.dot(rel, e2)), float(np.dot(rel, e1))) % (2 * math.pi)

    if angle(mid) > angle(w1):
        e2 = -e2
    return center, e1, e2, radius, angle(w1)


def x1_closed_form_circle(theta: float) -> tuple[np.ndarray, float]:
    """Center and radius of the x1 circle from the analytic plane.

    The anchor plane is z = -2 sin(2 theta/3) y + cos(theta).  With
    beta = 1 + 4 sin^2(2 theta/3) and alpha = 4 sin(2 theta/3) cos(theta)
    the circle is centered at (0, alpha/(2 beta), cos(theta)/beta) with
    radius sqrt(1 + alpha^2/(4 beta) - cos^2 theta).
    """
    s = math.sin(2 * theta / 3)
    c = math.cos(theta)
    beta = 1 + 4 * s * s
    alpha = 4 * s * c
    center = np.array([0.0, alpha / (2 * beta), c / beta])
    radius = math.sqrt(1 + alpha * alpha / (4 * beta) - c * c)
    return center, radius


def _x1_points(theta: float, t: np.ndarray) -> np.ndarray:
    circle = _x1_circle(theta)
    if circle is None:
        return np.broadcast_to([0.0, 0.0, 1.0], t.shape + (3,)).copy()
    center, e1, e2, radius, arc = circle
    ang = (t * arc / math.pi)[..., None]
    return center + radius * (np.cos(ang) * e1 + np.sin(ang) * e2)


def _y1_points(theta: float, t: np.ndarray) -> np.ndarray:
    return _x1_points(theta, math.pi - t) * _MIRROR_Y


_CURVES = {"x1": _x1_points, "x2": _x2_points, "y1": _y1_points, "y2": _y2_points}


def trajectory_points(name: str, theta: float, t) -> np.ndarray:
    """Bloch vectors of trajectory ``name`` at parameters ``t`` (array in [0, pi])."""
    try:
        fn = _CURVES[name]
    except KeyError:
        raise InvalidInputError(f"unknown trajectory {name!r}") from None
    return fn(float(theta), _check_t(np.atleast_1d(t)))


def _single(name: str, theta: float, t: float) -> BlochVector:
    return BlochVector.from_array(trajectory_points(name, theta, [t])[0])


def trajectory_x1(theta: float, t: float) -> BlochVector:
    return _single("x1", theta, t)


def trajectory_x2(theta: float, t: float) -> BlochVector:
    return _single("x2", theta, t)


def trajectory_y1(theta: float, t: float) -> BlochVector:
    return _single("y1", theta, t)


def trajectory_y2(theta: float, t: float) -> BlochVector:
    return _single("y2", theta, t)


def sample_times(d: int) -> np.ndarray:
    return np.arange(1, d + 1) * math.pi / (d + 1)


def _setting_kets(params: TrajectoryParams) -> dict[str, np.ndarray]:
    ts = sample_times(params.d)
    kets = {name: bloch_to_kets(fn(params.theta, ts)) for name, fn in _CURVES.items()}
    w1, w2 = anchors(params.theta)
    kets["w1"], kets["w2"] = bloch_to_kets(np.stack([w1, w2]))
    return kets


def build_setting_sequences(params: TrajectoryParams) -> SettingSequences:
    kets = _setting_kets(params)

    def seq(name):
        return tuple(PureState(k / np.linalg.norm(k)) for k in kets[name])

    return SettingSequences(
        alice=(seq("x1"), seq("x2")),
        bob=(seq("y1"), seq("y2")),
        w1=PureState(kets["w1"]),
        w2=PureState(kets["w2"]),
    )


def _v_from_kets(kets, i: int, j: int) -> complex:
    ring = np.concatenate(
        [kets[f"x{i}"], kets["w1"][None], kets[f"y{j}"], kets["w2"][None]]
    )
    return cyclic_overlap(ring)


def vij(params: TrajectoryParams, i: int, j: int) -> GeometricFactor:
    _check_setting(i, j)
    return GeometricFactor(_v_from_kets(_setting_kets(params), i, j))


def chsh_combination(c11: float, c12: float, c21: float, c22: float) -> float:
    return c11 + c12 + c21 - c22


def chsh_value(params: TrajectoryParams) -> ChshReport:
    kets = _setting_kets(params)
    v = np.array(
        [[_v_from_kets(kets, i, j) for j in (1, 2)] for i in (1, 2)], dtype=complex
    )
    corr = v.real.copy()
    v.setflags(write=False)
    corr.setflags(write=False)
    return ChshReport(
        v=v,
        correlators=corr,
        i_chsh=chsh_combination(corr[0, 0], corr[0, 1], corr[1, 0], corr[1, 1]),
    )


def chsh_zeno_limit(theta: float) -> float:
    """d -> infinity value 3 cos(p) - cos(3 p), p = pi (1 - cos theta) / 3."""
    if not (0.0 <= theta <= math.pi / 2 + 1e-15):
        raise InvalidInputError("theta must lie in [0, pi/2]")
    p = math.pi * (1 - math.cos(theta)) / 3
    return 3 * math.cos(p) - math.cos(3 * p)


def chsh_scan(d_values, thetas) -> list[dict]:
    """One record per (d, theta) with correlators, phases and both CHSH values."""
    out = []
    for d in d_values:
        for theta in thetas:
            rep = chsh_value(TrajectoryParams(theta, d))
            rec = {"theta": float(theta), "d": int(d)}
            for i, j in SETTINGS:
                rec[f"re_v{i}{j}"] = float(rep.correlators[i - 1, j - 1])
            for i, j in SETTINGS:
                rec[f"phase_g{i}{j}"] = rep.factor(i, j).phase
            rec["i_chsh"] = float(rep.i_chsh)
            rec["i_zeno"] = chsh_zeno_limit(float(theta))
            out.append(rec)
    return out


# --- four-photon (d = 1) case -------------------------------------------------

BLOCH_LABELS = ("x1", "x2", "w1", "w2", "y1", "y2")


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _triple(a, b, c):
    """a . (b x c)"""
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            + a[1] * (b[2] * c[0] - b[0] * c[2])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def projector_cycle_trace(a, b, c, d) -> complex:
    """tr[P_a P_b P_c P_d] for qubit projectors P_r = (I + r.sigma)/2.

    Expanded with (r.sigma)(s.sigma) = (r.s) I + i (r x s).sigma, so only
    dot and triple products of the Bloch vectors enter.
    """
    a, b, c, d = (tuple(float(v) for v in r) for r in (a, b, c, d))
    ab, ac, ad = _dot(a, b), _dot(a, c), _dot(a, d)
    bc, bd, cd = _dot(b, c), _dot(b, d), _dot(c, d)
    real = 1 + ab + ac + ad + bc + bd + cd + ab * cd - ac * bd + ad * bc
    imag = _triple(a, b, c) + _triple(a, b, d) + _triple(a, c, d) + _triple(b, c, d)
    return complex(real, imag) / 8


def chsh_d1_bloch(x1, x2, w1, w2, y1, y2) -> float:
    """CHSH value of the four-photon ring from six Bloch vectors."""
    def re_v(x, y):
        return projector_cycle_trace(x, w1, y, w2).real

    return chsh_combination(re_v(x1, y1), re_v(x1, y2), re_v(x2, y1), re_v(x2, y2))


def _angles_to_vectors(params) -> list[tuple[float, float, float]]:
    out = []
    for k in range(6):
        polar, azimuth = float(params[2 * k]), float(params[2 * k + 1])
        sp = math.sin(polar)
        out.append((sp * math.cos(azimuth), sp * math.sin(azimuth), math.cos(polar)))
    return out


def _neg_chsh(params: np.ndarray) -> float:
    return -chsh_d1_bloch(*_angles_to_vectors(params))


@dataclass(frozen=True)
class OptimizationResult:
    best_value: float
    vectors: dict[str, BlochVector]
    restarts: int
    seed: int


def optimize_chsh_d1(restarts: int = 200, seed: int = 0, tol: float = 1e-9) -> OptimizationResult:
    """Random-restart Nelder-Mead maximization of the d = 1 CHSH value."""
    if restarts < 1:
        raise InvalidInputError("need at least one restart")
    rng = np.random.default_rng(seed)
    best_val, best_x = -math.inf, None
    for _ in range(restarts):
        start = np.empty(12)
        start[0::2] = np.arccos(rng.uniform(-1.0, 1.0, 6))
        start[1::2] = rng.uniform(-math.pi, math.pi, 6)
        res = minimize(
            _neg_chsh,
            start,
            method="Nelder-Mead",
            options={"xatol": tol, "fatol": tol, "maxiter": 40000, "maxfev": 40000,
                     "adaptive": True},
        )
        if -res.fun > best_val:
            best_val, best_x = -float(res.fun), res.x
    vecs = _angles_to_vectors(best_x)
    return OptimizationResult(
        best_value=best_val,
        vectors={lab: BlochVector.from_array(np.asarray(v) / np.linalg.norm(v))
                 for lab, v in zip(BLOCH_LABELS, vecs)},
        restarts=restarts,
        seed=seed,
    )


_SCAN_CHUNK = 20000


def random_state_scan(dim: int, samples: int, seed: int = 0) -> float:
    """Largest d = 1 CHSH value over Haar-random internal states of dimension ``dim``.

    Each draw picks the six states x1, x2, w1, w2, y1, y2 independently.
    """
    if dim < 2:
        raise InvalidInputError("internal dimension must be at least 2")
    if samples < 1:
        raise InvalidInputError("need at least one sample")
    rng = np.random.default_rng(seed)
    best = -math.inf
    done = 0
    while done < samples:
        n = min(_SCAN_CHUNK, samples - done)
        z = rng.normal(size=(n, 6, dim)) + 1j * rng.normal(size=(n, 6, dim))
        z /= np.linalg.norm(z, axis=2, keepdims=True)
        x1, x2, w1, w2, y1, y2 = (z[:, k] for k in range(6))

        def ov(a, b):
            return np.einsum("ni,ni->n", a.conj(), b)

        def v(x, y):
            return ov(x, w1) * ov(w1, y) * ov(y, w2) * ov(w2, x)

        i_chsh = (v(x1, y1) + v(x1, y2) + v(x2, y1) - v(x2, y2)).real
        best = max(best, float(i_chsh.max()))
        done += n
    return best
