"""Internal photon states and the geometric quantities built from them.

Pure states are complex amplitude vectors, mixed states are density
matrices, and qubit states can also be given as Bloch vectors.  The
central object is the cyclic overlap product of an ordered tuple of
states, whose argument is the collective (Pancharatnam) phase and whose
modulus is the many-photon interference visibility.

Bloch convention: the unit vector (sin a cos b, sin a sin b, cos a) maps
to the state (cos(a/2), e^{ib} sin(a/2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidInputError, UndefinedPhaseError

NORM_TOL = 1e-12
EIG_FLOOR = -1e-10
VISIBILITY_FLOOR = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector of one photon's internal state."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size < 2:
            raise InvalidInputError("internal dimension must be at least 2")
        if not np.all(np.isfinite(amps)):
            raise InvalidInputError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, vector) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidInputError("cannot normalize a zero or non-finite vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> np.ndarray:
        a = self.amplitudes
        return np.outer(a, a.conj())

    def to_mixed(self) -> "MixedState":
        return MixedState(self.density())

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())


@dataclass(frozen=True, eq=False)
class MixedState:
    """Density matrix of one photon's internal state."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise InvalidInputError("density matrix must be square with dim >= 2")
        if not np.all(np.isfinite(rho)):
            raise InvalidInputError("density matrix must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > NORM_TOL:
            raise InvalidInputError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > NORM_TOL:
            raise InvalidInputError("density matrix does not have unit trace")
        if np.linalg.eigvalsh(rho).min() < EIG_FLOOR:
            raise InvalidInputError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", _frozen(rho))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MixedState):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise InvalidInputError("Bloch components must be finite")
            object.__setattr__(self, name, val)
        if self.norm() > 1.0 + NORM_TOL:
            raise InvalidInputError(f"Bloch vector longer than 1 (|b|={self.norm()!r})")

    @classmethod
    def from_array(cls, arr) -> "BlochVector":
        x, y, z = (float(c) for c in np.asarray(arr, dtype=float).reshape(3))
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class GeometricFactor:
    """Cyclic overlap product V, with phase arg V and visibility |V|."""

    value: complex

    @property
    def phase(self) -> float:
        ph = math.atan2(self.value.imag, self.value.real)
        # atan2 can return -pi for a negative real axis approached from below
        return math.pi if ph == -math.pi else ph

    @property
    def visibility(self) -> float:
        return abs(self.value)


StateLike = Union[PureState, MixedState]


def as_pure(state) -> PureState:
    if isinstance(state, PureState):
        return state
    if isinstance(state, MixedState):
        raise InvalidInputError("expected a pure state, got a density matrix")
    if isinstance(state, BlochVector):
        return pure_from_bloch(state)
    return PureState(state)


def as_density(state) -> np.ndarray:
    """Density matrix of a pure or mixed state (validated)."""
    if isinstance(state, MixedState):
        return state.matrix
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, BlochVector):
        return pure_from_bloch(state).density()
    arr = np.asarray(state)
    if arr.ndim == 2:
        return MixedState(arr).matrix
    return PureState(arr).density()


def pure_from_bloch(b: BlochVector) -> PureState:
    if not isinstance(b, BlochVector):
        b = BlochVector.from_array(b)
    n = b.norm()
    if abs(n - 1.0) > NORM_TOL:
        raise InvalidInputError(f"pure states need a unit Bloch vector (|b|={n!r})")
    polar = math.acos(max(-1.0, min(1.0, b.z / n)))
    azimuth = math.atan2(b.y, b.x)
    amps = np.array(
        [math.cos(polar / 2), np.exp(1j * azimuth) * math.sin(polar / 2)], dtype=complex
    )
    # absorb the residual rounding of cos/sin so the state passes its own check
    return PureState(amps / np.linalg.norm(amps))


def bloch_to_kets(vectors: np.ndarray) -> np.ndarray:
    """Vectorized pure_from_bloch for an (n, 3) array of unit vectors.

    Returns an (n, 2) complex array. No validation is done here.
    """
    v = np.asarray(vectors, dtype=float)
    polar = np.arccos(np.clip(v[:, 2], -1.0, 1.0))
    azimuth = np.arctan2(v[:, 1], v[:, 0])
    return np.stack(
        [np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)], axis=1
    ).astype(complex)


def state_to_bloch(psi: PureState) -> BlochVector:
    psi = as_pure(psi)
    if psi.dim != 2:
        raise InvalidInputError("Bloch vectors exist only for qubit states")
    a = psi.amplitudes
    return BlochVector.from_array(
        [float(np.real(a.conj() @ PAULI[k] @ a)) for k in range(3)]
    )


def _common_dim(dims: Iterable[int]) -> int:
    dims = set(dims)
    if len(dims) != 1:
        raise InvalidInputError(f"states have mismatched dimensions {sorted(dims)}")
    return dims.pop()


def cyclic_overlap(amplitudes: np.ndarray) -> complex:
    """<a_0|a_1><a_1|a_2>...<a_{n-1}|a_0> for an (n, dim) array of kets."""
    a = np.asarray(amplitudes)
    overlaps = np.einsum("ki,ki->k", a.conj(), np.roll(a, -1, axis=0))
    return complex(np.prod(overlaps))


def geometric_factor(states: Sequence[PureState]) -> GeometricFactor:
    """Cyclic product of overlaps of an ordered tuple of pure states."""
    states = [as_pure(s) for s in states]
    if len(states) < 2:
        raise InvalidInputError("need at least two states")
    _common_dim(s.dim for s in states)
    return GeometricFactor(cyclic_overlap(np.stack([s.amplitudes for s in states])))


def pancharatnam_phase(states: Sequence[PureState]) -> float:
    factor = geometric_factor(states)
    if factor.visibility < VISIBILITY_FLOOR:
        raise UndefinedPhaseError(
            f"collective phase undefined at visibility {factor.visibility:.3e}"
        )
    return factor.phase


def geometric_factor_mixed(rhos: Sequence[StateLike]) -> GeometricFactor:
    """tr[rho_1 rho_2 ... rho_N]; pure states are accepted as projectors."""
    mats = [as_density(r) for r in rhos]
    if len(mats) < 2:
        raise InvalidInputError("need at least two states")
    _common_dim(m.shape[0] for m in mats)
    return GeometricFactor(complex(np.trace(reduce(np.matmul, mats))))


def _side(u: np.ndarray, v: np.ndarray) -> float:
    return math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v)))


def _triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Spherical excess of the geodesic triangle abc (L'Huilier)."""
    sa, sb, sc = _side(b, c), _side(c, a), _side(a, b)
    s = 0.5 * (sa + sb + sc)
    prod = (
        math.tan(s / 2)
        * math.tan(max(s - sa, 0.0) / 2)
        * math.tan(max(s - sb, 0.0) / 2)
        * math.tan(max(s - sc, 0.0) / 2)
    )
    return 4.0 * math.atan(math.sqrt(max(prod, 0.0)))


def spherical_polygon_solid_angle(blochs: Sequence[BlochVector]) -> float:
    """Oriented solid angle of the geodesic polygon through the given points.

    Orientation: positive when the vertices run clockwise as seen from
    outside the sphere.  With this sign the collective phase of the
    corresponding qubit states equals minus half the returned value
    (mod 2 pi); e.g. the octant (+z, +x, +y) gives -pi/2 and phase +pi/4.
    """
    pts = []
    for b in blochs:
        if not isinstance(b, BlochVector):
            b = BlochVector.from_array(b)
        if abs(b.norm() - 1.0) > 1e-9:
            raise InvalidInputError("polygon vertices must be unit vectors")
        pts.append(b.as_array() / b.norm())
    n = len(pts)
    if n < 3:
        return 0.0
    for k in range(n):
        if np.dot(pts[k], pts[(k + 1) % n]) < -1.0 + 1e-12:
            raise InvalidInputError(f"vertices {k} and {(k + 1) % n} are antipodal")
    apex = pts[0]
    total = 0.0
    for k in range(1, n - 1):
        b, c = pts[k], pts[k + 1]
        if np.dot(apex, b) < -1.0 + 1e-12 or np.dot(apex, c) < -1.0 + 1e-12:
            raise InvalidInputError("fan diagonal is antipodal; rotate the vertex list")
        area = _triangle_area(apex, b, c)
        orient = float(np.dot(apex, np.cross(b, c)))
        if orient > 0:
            total -= area
        elif orient < 0:
            total += area
    return total


def random_pure(dim: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(v)


def random_mixed(dim: int, rng: np.random.Generator, rank: int | None = None) -> MixedState:
    """Random density matrix from a Ginibre draw (Hilbert-Schmidt for full rank)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T) / np.trace(rho).real
    return MixedState(rho)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase fix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_unit_vectors(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
