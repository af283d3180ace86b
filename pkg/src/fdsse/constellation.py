"""Modulation alphabets and their phase geometry.

Each constellation is normalized to unit average symbol energy. Besides
the point set, the PAPR bounds consume three geometric quantities: the
per-index incremental rotation ``phi`` (pi/2 for pi/2-BPSK, 0 for QAM),
the squared peak amplitude, and the set of pairwise phase differences
modulo pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KINDS = ("pi2bpsk", "qpsk", "16qam", "64qam")

OMEGA_TOL = 1e-9  # dedup tolerance in radians for omega_set_of


@dataclass(frozen=True)
class Constellation:
    """A unit-energy symbol alphabet with its phase-geometry summary.

    ``points`` is indexed by integer label. Labels carry Gray-coded bits:
    the first half of the label bits selects the I level and the second
    half the Q level, each through a reflected-binary (Gray) mapping of
    the ascending PAM levels, so adjacent levels differ in one bit.
    """

    kind: str
    points: np.ndarray
    phi: float
    peak_amplitude_sq: float
    omega_set: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(len(self.points)))


def _gray_pam(nbits: int) -> np.ndarray:
    """Level lookup by bit pattern: table[bits] = PAM level (unnormalized).

    Position i in the ascending level grid gets bit pattern i ^ (i >> 1).
    """
    m = 1 << nbits
    table = np.empty(m)
    for pos in range(m):
        table[pos ^ (pos >> 1)] = 2 * pos - (m - 1)
    return table


def _square_qam_points(bits_per_axis: int) -> np.ndarray:
    axis = _gray_pam(bits_per_axis)
    m = 1 << bits_per_axis
    labels = np.arange(m * m)
    i = axis[labels >> bits_per_axis]
    q = axis[labels & (m - 1)]
    pts = i + 1j * q
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def omega_set_of(points: np.ndarray, tol: float = OMEGA_TOL) -> np.ndarray:
    """All pairwise phase differences (arg p - arg q) mod pi, deduplicated.

    Values within ``tol`` of pi are identified with 0. Returned sorted
    ascending; always contains 0 (self-differences).
    """
    points = np.asarray(points)
    if points.size == 0:
        raise ValueError("empty point set")
    ang = np.angle(points)
    diffs = (ang[:, None] - ang[None, :]).ravel() % np.pi
    diffs = np.where(np.pi - diffs < tol, 0.0, diffs)
    diffs = np.sort(diffs)
    keep = [diffs[0]]
    for v in diffs[1:]:
        if v - keep[-1] > tol:
            keep.append(v)
    return np.asarray(keep)


def make_constellation(kind: str) -> Constellation:
    """Build one of the supported alphabets ("pi2bpsk"|"qpsk"|"16qam"|"64qam")."""
    if kind == "pi2bpsk":
        points = np.array([1.0 + 0j, -1.0 + 0j])
        phi = np.pi / 2
    elif kind == "qpsk":
        points = _square_qam_points(1)
        phi = 0.0
    elif kind == "16qam":
        points = _square_qam_points(2)
        phi = 0.0
    elif kind == "64qam":
        points = _square_qam_points(3)
        phi = 0.0
    else:
        raise ValueError(f"unsupported constellation kind: {kind!r}")
    points.setflags(write=False)
    omega = omega_set_of(points)
    omega.setflags(write=False)
    return Constellation(
        kind=kind,
        points=points,
        phi=phi,
        peak_amplitude_sq=float(np.max(np.abs(points) ** 2)),
        omega_set=omega,
    )


def index_rotation(c: Constellation, n: int, dtype=np.complex128) -> np.ndarray:
    """The per-index rotation exp(j*phi*m), m = 0..n-1 (identity for QAM)."""
    if c.phi == 0.0:
        return np.ones(n, dtype=dtype)
    return np.exp(1j * c.phi * np.arange(n)).astype(dtype)


def draw_symbols(c: Constellation, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform symbols, with the per-index rotation applied."""
    if n < 1:
        raise ValueError("n must be >= 1")
    labels = rng.integers(0, len(c.points), size=n)
    return c.points[labels] * index_rotation(c, n)
