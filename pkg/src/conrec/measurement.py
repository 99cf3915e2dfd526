"""Noisy linear measurements, slab systems and the radial extent of the error polytope."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .sphere import UNIT_TOL, sample_uniform_directions


@dataclass(frozen=True)
class Measurement:
    direction: np.ndarray
    noise: float
    value: float


# ---------------------------------------------------------------------------
# direction laws


@dataclass(frozen=True)
class UniformSphere:
    tag = "uniform-sphere"

    def sample(self, d, n, rng):
        return sample_uniform_directions(d, n, rng)


@dataclass(frozen=True)
class UniformCap:
    """Uniform law on the open cap of radius ``theta0`` around ``center`` (rejection sampling)."""

    center: np.ndarray
    theta0: float
    tag = "uniform-cap"

    def __post_init__(self):
        if not 0.0 < self.theta0 <= math.pi:
            raise DomainError(f"cap law radius must lie in (0, pi], got {self.theta0!r}")

    def sample(self, d, n, rng):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (d,):
            raise DimensionMismatchError(f"cap center has shape {c.shape}, expected ({d},)")
        cos0 = math.cos(self.theta0)
        out = np.empty((n, d))
        filled = 0
        while filled < n:
            need = n - filled
            cand = sample_uniform_directions(d, max(2 * need, 16), rng)
            keep = cand[cand @ c > cos0][:need]
            out[filled:filled + len(keep)] = keep
            filled += len(keep)
        return out


@dataclass(frozen=True)
class FixedList:
    """Deterministic directions, used in order; the list must hold at least N vectors."""

    vectors: np.ndarray
    tag = "fixed-list"

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1.0) > UNIT_TOL):
            raise ValueError("fixed-list directions must be unit vectors")
        object.__setattr__(self, "vectors", v)

    def sample(self, d, n, rng):
        if self.vectors.shape[1] != d:
            raise DimensionMismatchError(f"fixed list has dimension {self.vectors.shape[1]}, expected {d}")
        if len(self.vectors) < n:
            raise ValueError(f"fixed list holds {len(self.vectors)} directions, {n} requested")
        return self.vectors[:n].copy()


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True, eq=False)
class Instance:
    """Signal ``x``, noise bound ``delta`` and measurements ``q = Phi x + eps``.

    Stored as arrays: ``phi`` is ``(N, d)``, ``noise`` and ``values`` are ``(N,)``.
    """

    signal: np.ndarray
    delta: float
    phi: np.ndarray
    noise: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.phi) < 1:
            raise ValueError("an instance needs at least one measurement")
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta!r}")
        for a in (self.signal, self.phi, self.noise, self.values):
            a.setflags(write=False)

    @property
    def N(self):
        return self.phi.shape[0]

    @property
    def d(self):
        return self.phi.shape[1]

    @property
    def measurements(self):
        return [Measurement(self.phi[n], float(self.noise[n]), float(self.values[n]))
                for n in range(self.N)]


def make_instance(signal, delta, phi, noise):
    """Build an instance from explicit directions and noises; values are computed here."""
    signal = np.array(signal, dtype=float).reshape(-1)
    phi = np.array(phi, dtype=float)
    if phi.ndim == 1:
        phi = phi[:, None]
    noise = np.array(noise, dtype=float).reshape(-1)
    if phi.shape[1] != signal.size or phi.shape[0] != noise.size:
        raise DimensionMismatchError("signal, directions and noises disagree in shape")
    if np.any(np.abs(noise) > delta):
        raise ValueError("noise exceeds delta")
    return Instance(signal, float(delta), phi, noise, phi @ signal + noise)


def draw_instance(x, N, delta, law, rng, noise_width=1.0):
    """Draw N measurements of ``x`` with directions from ``law`` and uniform noise on [-delta, delta].

    ``noise_width`` scales the noise support and exists for tests (0 gives
    noiseless measurements).
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    x = np.array(x, dtype=float).reshape(-1)
    phi = law.sample(x.size, N, rng)
    noise = noise_width * rng.uniform(-delta, delta, size=N)
    return Instance(x, float(delta), phi, noise, phi @ x + noise)


def consistency_residuals(candidate, instance):
    c = np.asarray(candidate, dtype=float).reshape(-1)
    if c.size != instance.d:
        raise DimensionMismatchError(f"candidate has dimension {c.size}, expected {instance.d}")
    return instance.phi @ c - instance.values


def is_consistent(candidate, instance, delta=None, tol=0.0):
    delta = instance.delta if delta is None else delta
    return bool(np.max(np.abs(consistency_residuals(candidate, instance))) <= delta + tol)


# ---------------------------------------------------------------------------
# error polytope


@dataclass(frozen=True, eq=False)
class SlabSystem:
    """The polytope ``{u : |<u, phi_n> - eps_n| <= delta for all n}``."""

    directions: np.ndarray  # (N, d)
    offsets: np.ndarray  # (N,)
    delta: float

    @property
    def N(self):
        return self.directions.shape[0]

    @property
    def d(self):
        return self.directions.shape[1]

    def contains(self, u, slack=0.0):
        u = np.asarray(u, dtype=float)
        return bool(np.all(np.abs(self.directions @ u - self.offsets) <= self.delta + slack))

    def scaled(self, c):
        return SlabSystem(self.directions, c * self.offsets, c * self.delta)


def error_polytope(instance):
    return SlabSystem(np.asarray(instance.phi), np.asarray(instance.noise), instance.delta)


def radial_extent(slabs, psi):
    """Largest ``r >= 0`` with ``r * psi`` in the slab system (``inf`` if unbounded)."""
    a = slabs.directions @ np.asarray(psi, dtype=float)
    return float(_radial_from_projections(a, slabs.offsets, slabs.delta))


def _radial_from_projections(a, eps, delta):
    # a, eps broadcast over a trailing measurement axis.
    num = np.where(a >= 0.0, eps + delta, delta - eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(a == 0.0, np.inf, num / np.abs(a))
    return x.min(axis=-1)


def radial_extent_batch(phi, noise, delta, psi):
    """Vectorised radial extent for stacked instances ``phi (T, N, d)``, ``noise (T, N)``."""
    a = phi @ np.asarray(psi, dtype=float)
    return _radial_from_projections(a, noise, delta)


# ---------------------------------------------------------------------------
# text dump format
#
#   # conrec-instance d=<d> N=<N> delta=<delta>
#   # signal <x_1> ... <x_d>
#   <phi_1> ... <phi_d> <eps> <q>        (one line per measurement)
#
# All numbers use 17 significant digits, so a dump round-trips exactly.


def _fmt(v):
    return format(float(v), ".17g")


def dump_instance(instance, fh):
    fh.write(f"# conrec-instance d={instance.d} N={instance.N} delta={_fmt(instance.delta)}\n")
    fh.write("# signal " + " ".join(_fmt(v) for v in instance.signal) + "\n")
    for n in range(instance.N):
        row = list(instance.phi[n]) + [instance.noise[n], instance.values[n]]
        fh.write(" ".join(_fmt(v) for v in row) + "\n")


def load_instance(fh):
    header = fh.readline().split()
    if header[:2] != ["#", "conrec-instance"]:
        raise ValueError("not a conrec instance dump")
    meta = dict(kv.split("=", 1) for kv in header[2:])
    d, N, delta = int(meta["d"]), int(meta["N"]), float(meta["delta"])
    sig = fh.readline().split()
    if sig[:2] != ["#", "signal"]:
        raise ValueError("missing signal line")
    signal = np.array([float(v) for v in sig[2:]])
    rows = np.array([[float(v) for v in line.split()] for line in fh if line.strip()])
    if rows.shape != (N, d + 2):
        raise ValueError(f"expected {N} rows of {d + 2} numbers, got {rows.shape}")
    return Instance(signal, delta, rows[:, :d].copy(), rows[:, d].copy(), rows[:, d + 1].copy())


def load_direction_file(path):
    """Read a whitespace-separated direction list (one unit vector per line)."""
    vecs = np.loadtxt(path, ndmin=2, comments="#")
    return FixedList(vecs)
