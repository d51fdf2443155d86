"""Transformations into the uniform-speed boundary form.

Three steps, applied in order as needed:

1. :func:`diagonalize_constant` -- decouple a constant-coefficient
   first-order system into scalar transport channels,
2. :func:`reflect_positive` -- flip channels so every diagonal speed is
   negative (``z_t = -lambda z_zeta``),
3. :func:`split_commensurate` -- cut each channel into equal-travel-time
   segments so the whole network shares one travel time.

Splitting convention: a channel with travel time ``r*g`` (``g`` the common
travel time) becomes ``r`` segments that replace the channel's slot in the
state vector, enumerated from the outgoing end backwards, each mapped to
the unit interval preserving orientation.  Segment ``j`` of channel ``i``
covers the original interval ``[1-(j+1)/r, 1-j/r]``.  Chaining rows append
to the constraint block in channel order: segment ``j``'s incoming trace
equals segment ``j+1``'s outgoing trace, written ``+1`` in the ``K`` slot
of segment ``j`` and ``-1`` in the ``L`` slot of segment ``j+1``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import UnsupportedSystemError
from .model import MultiSpeedSystem, PHSystem, RationalSpeed, RawConstantSystem

#: Largest admissible channel count after splitting.
MAX_SPLIT_CHANNELS = 100_000

#: Denominator cap when converting floating speeds to exact rationals.
MAX_SPEED_DENOMINATOR = 10**6


@dataclass(frozen=True)
class DiagonalizedConstant:
    """Diagonalization ``S (P1 H) S^-1 = Delta`` of a constant-coefficient
    system; ``Delta`` carries the signed channel speeds."""

    Delta: np.ndarray
    S: np.ndarray
    k_pos: int
    l_neg: int


def _symmetric_sqrt(h: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh(h)
    if vals.min() <= tol * max(vals.max(), 1.0):
        raise ValueError("H must be positive definite")
    root = np.sqrt(vals)
    return vecs @ np.diag(root) @ vecs.T, vecs @ np.diag(1.0 / root) @ vecs.T


def diagonalize_constant(
    raw: RawConstantSystem, tol: float = 1e-10
) -> tuple[DiagonalizedConstant, MultiSpeedSystem]:
    """Diagonalize ``P1 H`` and rewrite the boundary rows on the channels.

    ``P1 H`` is similar to the symmetric matrix ``H^1/2 P1 H^1/2``, so the
    eigenvalues are real; they are ordered positive-first descending, then
    negative ascending in magnitude.  The returned network uses the
    unweighted boundary convention: with ``z = S x`` the boundary rows act
    on ``z(0)`` (matrix ``K``) and ``z(1)`` (matrix ``L``).
    """
    p1 = raw.P1
    n = raw.n
    if p1.shape != (n, n) or raw.H.shape != (n, n):
        raise ValueError("P1 and H must be square and of equal size")
    scale = max(linalg.two_norm(p1), 1.0)
    if linalg.two_norm(p1 - p1.T) > tol * scale:
        raise ValueError("P1 must be symmetric (non-Hermitian input)")
    hroot, hroot_inv = _symmetric_sqrt(raw.H, tol)
    core = hroot @ p1 @ hroot
    core = 0.5 * (core + core.T)
    vals, vecs = np.linalg.eigh(core)
    if np.abs(vals).min() <= tol * max(np.abs(vals).max(), 1.0):
        raise ValueError("P1 H has an eigenvalue within tolerance of zero")

    pos = sorted([i for i in range(n) if vals[i] > 0], key=lambda i: (-vals[i], i))
    neg = sorted([i for i in range(n) if vals[i] < 0], key=lambda i: (-vals[i], i))
    order = pos + neg
    delta_diag = vals[order]
    s_mat = vecs[:, order].T @ hroot
    s_inv = hroot_inv @ vecs[:, order]

    prod = p1 @ raw.H
    residual = linalg.two_norm(s_mat @ prod - np.diag(delta_diag) @ s_mat)
    if residual > 1e-10 * max(linalg.two_norm(prod), 1.0):
        raise ValueError(f"diagonalization residual {residual:.3e} above tolerance")

    speeds = []
    for value in delta_diag:
        frac = Fraction(float(abs(value))).limit_denominator(MAX_SPEED_DENOMINATOR)
        if frac == 0 or abs(float(frac) - abs(value)) > 1e-9 * max(1.0, abs(value)):
            raise UnsupportedSystemError(
                f"speed {value!r} has no small rational representation"
            )
        speeds.append(
            RationalSpeed(frac.numerator, frac.denominator, 1 if value > 0 else -1)
        )

    # Boundary rows act on [(H x)(1); (H x)(0)] = [H S^-1 z(1); H S^-1 z(0)].
    h_sinv = raw.H @ s_inv
    wb = np.vstack([raw.WB1, raw.WB2])
    sys = MultiSpeedSystem(
        speeds=tuple(speeds),
        K=wb[:, n:] @ h_sinv,
        L=wb[:, :n] @ h_sinv,
        Ky=raw.WC[:, n:] @ h_sinv,
        Ly=raw.WC[:, :n] @ h_sinv,
        m=raw.WB2.shape[0],
    )
    diag = DiagonalizedConstant(
        Delta=np.diag(delta_diag), S=s_mat, k_pos=len(pos), l_neg=len(neg)
    )
    return diag, sys


def reflect_positive(sys: MultiSpeedSystem) -> MultiSpeedSystem:
    """Reflect every +1 channel (``z -> z(1 - zeta)``) so all speeds are
    negative; the reflected channel's ``K``/``L`` (and ``Ky``/``Ly``)
    columns swap because its endpoint traces swap."""
    flip = [i for i, s in enumerate(sys.speeds) if s.direction > 0]
    if not flip:
        return sys
    K, L, Ky, Ly = sys.K.copy(), sys.L.copy(), sys.Ky.copy(), sys.Ly.copy()
    K[:, flip], L[:, flip] = L[:, flip].copy(), K[:, flip].copy()
    Ky[:, flip], Ly[:, flip] = Ly[:, flip].copy(), Ky[:, flip].copy()
    speeds = tuple(
        RationalSpeed(s.num, s.den, -1) if s.direction > 0 else s for s in sys.speeds
    )
    return MultiSpeedSystem(speeds=speeds, K=K, L=L, Ky=Ky, Ly=Ly, m=sys.m)


def common_travel_time(speeds) -> Fraction:
    """Exact gcd of the channel travel times.

    For reduced fractions this is gcd(numerators) / lcm(denominators),
    computed in integer arithmetic.
    """
    num = 0
    den = 1
    for s in speeds:
        t = s.travel_time
        num = math.gcd(num, t.numerator)
        den = den * t.denominator // math.gcd(den, t.denominator)
    return Fraction(num, den)


def segment_index_map(speeds, g: Fraction) -> list[list[int]]:
    """Column slots of each channel's segments after splitting (outgoing
    end first)."""
    slots = []
    offset = 0
    for s in speeds:
        r = s.travel_time / g
        count = int(r)
        slots.append(list(range(offset, offset + count)))
        offset += count
    return slots


def split_commensurate(sys: MultiSpeedSystem) -> PHSystem:
    """Split rational-speed channels into a uniform-travel-time network.

    All channels must already have direction -1 (apply
    :func:`reflect_positive` first).  The result has ``sum(r_i)`` channels
    and travel time ``g = gcd`` of the channel travel times; original
    boundary/output rows move onto the outermost segments and chaining
    rows are appended to the constraint block.
    """
    if any(s.direction > 0 for s in sys.speeds):
        raise UnsupportedSystemError(
            "all channels must have direction -1; apply reflect_positive first"
        )
    n, m = sys.n, sys.m
    g = common_travel_time(sys.speeds)
    counts = [s.travel_time / g for s in sys.speeds]
    if any(c.denominator != 1 for c in counts):
        raise UnsupportedSystemError("travel-time ratios are not commensurate")
    slots = segment_index_map(sys.speeds, g)
    n_new = sum(len(s) for s in slots)
    if n_new > MAX_SPLIT_CHANNELS:
        raise UnsupportedSystemError(
            f"splitting would create {n_new} channels (speed ratios overflow)"
        )

    # Original channel traces: z_i(0) is the incoming trace of the last
    # (most upstream) segment, z_i(1) the outgoing trace of segment 0.
    in_col = np.array([s[-1] for s in slots])
    out_col = np.array([s[0] for s in slots])

    def remap(kmat, lmat):
        knew = np.zeros((kmat.shape[0], n_new))
        lnew = np.zeros((lmat.shape[0], n_new))
        knew[:, in_col] = kmat
        lnew[:, out_col] = lmat
        return knew, lnew

    K0_new, L0_new = remap(sys.K0, sys.L0)
    Ku_new, Lu_new = remap(sys.Ku, sys.Lu)
    Ky_new, Ly_new = remap(sys.Ky, sys.Ly)

    chain_k = np.zeros((n_new - n, n_new))
    chain_l = np.zeros((n_new - n, n_new))
    row = 0
    for segs in slots:
        for down, up in zip(segs[:-1], segs[1:]):
            chain_k[row, down] = 1.0
            chain_l[row, up] = -1.0
            row += 1

    return PHSystem(
        p=float(g),
        K0=np.vstack([K0_new, chain_k]),
        L0=np.vstack([L0_new, chain_l]),
        Ku=Ku_new,
        Lu=Lu_new,
        Ky=Ky_new,
        Ly=Ly_new,
    )


def split_initial_profile(speeds, z0_cells: list[np.ndarray], g: Fraction) -> np.ndarray:
    """Resample per-channel cell profiles onto the split network's grid.

    ``z0_cells[i]`` holds channel ``i``'s piecewise-constant values on
    ``r_i * grid_n`` equal cells of the unit interval; the result is the
    ``(sum r_i) x grid_n`` profile of the split system.
    """
    slots = segment_index_map(speeds, g)
    grid_n = len(z0_cells[0]) // len(slots[0])
    out = np.zeros((sum(len(s) for s in slots), grid_n))
    for i, segs in enumerate(slots):
        r = len(segs)
        cells = np.asarray(z0_cells[i], dtype=float)
        if cells.shape != (r * grid_n,):
            raise ValueError(
                f"channel {i}: expected {r * grid_n} cells, got {cells.shape}"
            )
        for j, col in enumerate(segs):
            lo = (r - 1 - j) * grid_n
            out[col] = cells[lo : lo + grid_n]
    return out
