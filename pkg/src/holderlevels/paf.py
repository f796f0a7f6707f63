"""Piecewise affine functions on the Sierpinski triangle.

A function at level n is stored as exact rational values on the vertex
set V_n and extended affinely on every level-n construction triangle.
The "standard" variant has two equal vertex values on every triangle,
obtained by the midpoint-copy subdivision.  Certificates bound the
Holder ratio by exhausting vertex pairs at a chosen depth.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact import PointQ3, QSqrt3, midpoint
from .triangles import (
    ROOT_VERTICES,
    barycentric_weights,
    check_address,
    child_vertices,
    locate,
    triangle_vertices,
)


@dataclass(frozen=True)
class HolderParams:
    """Certified constants: |f(x)-f(y)| <= min(c |x-y|**alpha, M |x-y|)."""

    alpha: float
    c: float
    lipschitz: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.c <= 0:
            raise ValueError("the Holder constant must be positive")
        if self.lipschitz is not None and self.lipschitz <= 0:
            raise ValueError("the Lipschitz constant must be positive")


class PiecewiseAffineFn:
    """Exact rational vertex table plus affine extension per triangle."""

    def __init__(self, level: int, values: dict[PointQ3, Fraction],
                 standard: bool = False, holder: HolderParams | None = None):
        self.level = level
        self.values = values
        self.standard = standard
        self.holder = holder

    # -- vertex access -------------------------------------------------

    def corner_values(self, word: str) -> tuple[Fraction, Fraction, Fraction]:
        """Values at the three corners of the addressed triangle.

        Below the function's own level this is a table lookup; deeper
        corners are affine combinations, produced by midpoint averaging
        along the address.
        """
        check_address(word)
        head, tail = word[: self.level], word[self.level:]
        pts = triangle_vertices(head)
        vals = [self.values[p] for p in pts]
        for ch in tail:
            s = int(ch)
            anchor = vals[s]
            vals = [(v + anchor) / 2 for v in vals]
        return tuple(vals)

    def vertex_value(self, point: PointQ3) -> Fraction:
        try:
            return self.values[point]
        except KeyError:
            return self.eval(point)

    def eval(self, point) -> Fraction:
        """Exact value by barycentric interpolation.

        Accepts a PointQ3 or a pair of Q(sqrt(3)) coordinates.  Raises
        ValueError when the point is outside the level-n approximation
        or when the exact value has an irrational part (possible for
        points that are not rational combinations of the containing
        triangle's corners).
        """
        word = locate(point, self.level)
        vs = triangle_vertices(word)
        ws = barycentric_weights(point, vs)
        vals = [self.values[p] for p in vs]
        acc = QSqrt3(Fraction(0))
        for w, v in zip(ws, vals):
            acc = acc + w * QSqrt3(v)
        return acc.as_fraction()

    # -- refinement ----------------------------------------------------

    def refine(self, level: int) -> "PiecewiseAffineFn":
        """Same function represented on the finer vertex set."""
        if level < self.level:
            raise ValueError("cannot refine to a coarser level")
        if level == self.level:
            return PiecewiseAffineFn(self.level, dict(self.values),
                                     self.standard, self.holder)
        values: dict[PointQ3, Fraction] = {}
        stack = [(ROOT_VERTICES, tuple(self.values[p] for p in ROOT_VERTICES), 0)]
        while stack:
            pts, vals, depth = stack.pop()
            if depth == level:
                for p, v in zip(pts, vals):
                    values[p] = v
                continue
            for sym in range(3):
                cpts = child_vertices(pts, sym)
                if depth + 1 <= self.level:
                    cvals = tuple(self.values[p] for p in cpts)
                else:
                    anchor = vals[sym]
                    cvals = tuple((v + anchor) / 2 for v in vals)
                stack.append((cpts, cvals, depth + 1))
        return PiecewiseAffineFn(level, values, standard=False, holder=self.holder)

    def standardize(self) -> "PiecewiseAffineFn":
        """Midpoint-copy subdivision, one level down.

        Each triangle with corners v1, v2, v3 and edge midpoints
        v4 = mid(v1,v2), v5 = mid(v2,v3), v6 = mid(v1,v3) gets the new
        values f(v4) = f(v1), f(v5) = f(v2), f(v6) = f(v3), which forces
        a repeated value on every child.  The sup distance to the input
        is at most half the largest per-triangle oscillation.
        """
        values: dict[PointQ3, Fraction] = {}
        stack = [(ROOT_VERTICES, tuple(self.values[p] for p in ROOT_VERTICES), 0)]
        while stack:
            pts, vals, depth = stack.pop()
            if depth < self.level:
                for sym in range(3):
                    cpts = child_vertices(pts, sym)
                    cvals = tuple(self.values[p] for p in cpts)
                    stack.append((cpts, cvals, depth + 1))
                continue
            v1, v2, v3 = pts
            q1, q2, q3 = vals
            values[v1] = q1
            values[v2] = q2
            values[v3] = q3
            values[midpoint(v1, v2)] = q1
            values[midpoint(v2, v3)] = q2
            values[midpoint(v1, v3)] = q3
        return PiecewiseAffineFn(self.level + 1, values, standard=True,
                                 holder=self.holder)

    # -- structure checks ------------------------------------------------

    def iter_triangles(self):
        """Yields (word, corner values) over all level-n triangles."""
        stack = [("", tuple(self.values[p] for p in ROOT_VERTICES))]
        while stack:
            word, vals = stack.pop()
            if len(word) == self.level:
                yield word, vals
                continue
            pts = triangle_vertices(word)
            for sym in range(3):
                cpts = child_vertices(pts, sym)
                stack.append((word + str(sym), tuple(self.values[p] for p in cpts)))

    def is_standard(self) -> bool:
        return all(
            q1 == q2 or q2 == q3 or q1 == q3
            for _, (q1, q2, q3) in self.iter_triangles()
        )

    def is_locally_nonconstant(self) -> bool:
        return all(
            not (q1 == q2 == q3) for _, (q1, q2, q3) in self.iter_triangles()
        )

    def oscillation(self) -> Fraction:
        return max(max(v) - min(v) for _, v in self.iter_triangles())

    def lipschitz_sq(self) -> Fraction:
        """Exact square of the Lipschitz constant.

        For an affine piece on an equilateral triangle of side s with
        corner differences d1 = q2-q1, d2 = q3-q1 the gradient norm
        squared is (4/3) (d1**2 - d1 d2 + d2**2) / s**2.
        """
        best = Fraction(0)
        scale = Fraction(4, 3) * (4**self.level)
        for _, (q1, q2, q3) in self.iter_triangles():
            d1 = q2 - q1
            d2 = q3 - q1
            g = scale * (d1 * d1 - d1 * d2 + d2 * d2)
            if g > best:
                best = g
        return best

    def lipschitz(self) -> float:
        return math.sqrt(float(self.lipschitz_sq()))

    # -- serialization ---------------------------------------------------

    def to_json(self) -> dict:
        ids: dict[PointQ3, str] = {}
        stack = [("", ROOT_VERTICES)]
        while stack:
            word, pts = stack.pop()
            if len(word) == self.level:
                for corner, p in enumerate(pts):
                    key = f"{word}:{corner}"
                    if p not in ids or key < ids[p]:
                        ids[p] = key
                continue
            for sym in range(3):
                stack.append((word + str(sym), child_vertices(pts, sym)))
        entries = sorted(
            (ids[p], f"{v.numerator}/{v.denominator}") for p, v in self.values.items()
        )
        return {"level": self.level, "standard": self.standard, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "PiecewiseAffineFn":
        level = int(data["level"])
        values: dict[PointQ3, Fraction] = {}
        for key, frac in data["entries"]:
            word, corner = key.split(":")
            if len(word) != level:
                raise ValueError(f"vertex id {key!r} does not match level {level}")
            point = triangle_vertices(word)[int(corner)]
            values[point] = Fraction(frac)
        return cls(level, values, standard=bool(data.get("standard", False)))


def constant_fn(value: Fraction, level: int = 0) -> PiecewiseAffineFn:
    v = Fraction(value)
    base = PiecewiseAffineFn(0, {p: v for p in ROOT_VERTICES})
    return base.refine(level)


def affine_from_corners(q1: Fraction, q2: Fraction, q3: Fraction,
                        level: int = 0) -> PiecewiseAffineFn:
    """The globally affine function with the given root corner values."""
    vals = {p: Fraction(q) for p, q in zip(ROOT_VERTICES, (q1, q2, q3))}
    return PiecewiseAffineFn(0, vals).refine(level)


# ---------------------------------------------------------------------------
# Holder certificates
# ---------------------------------------------------------------------------

@dataclass
class HolderCertificate:
    alpha: float
    c: float
    depth: int
    max_ratio: float
    witness_pair: tuple[PointQ3, PointQ3] | None
    safety_factor: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.c

    @property
    def chained_bound(self) -> float:
        """Bound on the true ratio implied by the vertex-pair maximum.

        Finite-depth exhaustion underestimates the supremum; routing an
        arbitrary pair through nearby vertices inflates the vertex
        maximum by at most (4/sqrt(3))**alpha, which is recorded here.
        """
        return self.max_ratio * self.safety_factor


def _vertex_arrays(fn: PiecewiseAffineFn, depth: int):
    table: dict[PointQ3, Fraction] = {}
    stack = [(ROOT_VERTICES, tuple(fn.values[p] for p in ROOT_VERTICES), 0)]
    while stack:
        pts, vals, d = stack.pop()
        for p, v in zip(pts, vals):
            table[p] = v
        if d == depth:
            continue
        for sym in range(3):
            cpts = child_vertices(pts, sym)
            if d + 1 <= fn.level:
                cvals = tuple(fn.values[p] for p in cpts)
            else:
                anchor = vals[sym]
                cvals = tuple((v + anchor) / 2 for v in vals)
            stack.append((cpts, cvals, d + 1))
    points = list(table)
    xs = np.array([float(p.x) for p in points])
    ys = np.array([float(p.y) for p in points])
    vs = np.array([float(table[p]) for p in points])
    return points, xs, ys, vs


def holder_certificate(fn: PiecewiseAffineFn, alpha: float, c: float,
                       depth: int | None = None,
                       chunk: int = 512) -> HolderCertificate:
    """Max of |f(x)-f(y)| / |x-y|**alpha over vertex pairs at ``depth``.

    The certificate passes when the maximum is at most c.  Ratios are
    evaluated in floating point; exact values enter as floats, so the
    result carries the usual 1e-15 relative noise, negligible against
    the chained safety factor.
    """
    if depth is None:
        depth = fn.level + 2
    if depth < fn.level:
        raise ValueError("certificate depth must be at least the function level")
    points, xs, ys, vs = _vertex_arrays(fn, depth)
    n = len(points)
    best = 0.0
    pair = None
    for i0 in range(0, n, chunk):
        i1 = min(i0 + chunk, n)
        dx = xs[i0:i1, None] - xs[None, :]
        dy = ys[i0:i1, None] - ys[None, :]
        dv = np.abs(vs[i0:i1, None] - vs[None, :])
        dist = np.hypot(dx, dy)
        np.fill_diagonal(dist[:, i0:i1], np.inf)
        ratio = dv / dist**alpha
        idx = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[idx] > best:
            best = float(ratio[idx])
            pair = (points[i0 + idx[0]], points[idx[1]])
    return HolderCertificate(
        alpha=alpha, c=c, depth=depth, max_ratio=best, witness_pair=pair,
        safety_factor=(4.0 / math.sqrt(3.0)) ** alpha,
    )


# ---------------------------------------------------------------------------
# seeded generator
# ---------------------------------------------------------------------------

class ResamplingCapExceeded(RuntimeError):
    pass


_DISP_BITS = 20
_DISP_DENOM = 1 << _DISP_BITS


def _dyadic_uniform(rng: random.Random, lo: Fraction, hi: Fraction) -> Fraction:
    return lo + (hi - lo) * Fraction(rng.randrange(_DISP_DENOM + 1), _DISP_DENOM)


def random_standard_paf(seed: int, level: int, alpha: float, c: float,
                        *, check: bool = True, check_depth: int | None = None,
                        max_attempts: int = 50) -> PiecewiseAffineFn:
    """Seeded random standard function passing its Holder certificate.

    Midpoint displacement with amplitude shrinking like c * 2**(-k*alpha)
    per level k, followed by the midpoint-copy subdivision; deterministic
    in the seed.  Guarantees a repeated value and a non-constant triple
    on every level-``level`` triangle (a stand-in for generic inputs).

    Displacements at scale 2**-k add about amp * 2**(k alpha) to the
    Holder ratio and their slopes stack geometrically with factor
    2**(1-alpha) per level, so the headroom carries the normalizer
    1 - 2**(alpha-1) to keep the certificate margin uniform in alpha.
    """
    if level < 1:
        raise ValueError("a standard function needs level >= 1")
    if not 0 < c:
        raise ValueError("c must be positive")
    disp_headroom = 0.45 * (1 - 2.0 ** (-(1 - alpha))) if alpha < 1 else 0.1
    failing = None
    for attempt in range(max_attempts):
        rng = random.Random(seed * 1_000_003 + attempt)
        base_span = Fraction(max(1, int(0.25 * c * _DISP_DENOM)), _DISP_DENOM)
        vals = {}
        while True:
            triple = [_dyadic_uniform(rng, Fraction(0), base_span) for _ in range(3)]
            if len(set(triple)) == 3:
                break
        for p, v in zip(ROOT_VERTICES, triple):
            vals[p] = v
        fn = PiecewiseAffineFn(0, vals)
        ok = True
        for k in range(level - 1):
            amp = Fraction(
                max(1, int(disp_headroom * c * 2.0 ** (-(k + 1) * alpha)
                           * _DISP_DENOM)),
                _DISP_DENOM)
            new_vals: dict[PointQ3, Fraction] = {}
            for word, (q1, q2, q3) in fn.iter_triangles():
                pts = triangle_vertices(word)
                for (i, j) in ((0, 1), (1, 2), (0, 2)):
                    m = midpoint(pts[i], pts[j])
                    base_val = ((q1, q2, q3)[i] + (q1, q2, q3)[j]) / 2
                    new_vals[m] = base_val + _dyadic_uniform(rng, -amp, amp)
            merged = dict(fn.values)
            merged.update(new_vals)
            fn = PiecewiseAffineFn(k + 1, merged)
        # every pre-standardize triangle must have three distinct values,
        # otherwise the subdivision cannot be locally non-constant
        for word, v in fn.iter_triangles():
            if len(set(v)) != 3:
                ok = False
                failing = word
                break
        if not ok:
            continue
        out = fn.standardize()
        if check:
            cert = holder_certificate(out, alpha, c,
                                      depth=check_depth or out.level + 1)
            if not cert.passed:
                failing = cert.witness_pair
                continue
            out.holder = HolderParams(alpha, c, lipschitz=out.lipschitz())
        else:
            out.holder = HolderParams(alpha, c)
        return out
    raise ResamplingCapExceeded(
        f"no admissible sample after {max_attempts} attempts; last failure: {failing!r}"
    )
