"""Geometry of the Sierpinski subdivision.

A construction triangle is addressed by a word over {0,1,2}: symbol i
selects the child sitting at the parent's vertex i+1 (labels are
inherited through the contraction, so child i and its parent share the
vertex with index i).  The unit triangle has vertices (0,0), (1,0) and
(1/2, sqrt(3)/2); every subdivision vertex stays inside the CoordQ3
ring, which keeps containment and intersection tests exact.

The module also covers the boundary sub-fractal generated by the
level-l triangles touching the outer edges, the similarity onto the
rescaled triangle with vertices (0,0), (2/sqrt(3),0), (1/sqrt(3),1),
and the triangular-lattice counts used by the box-count law.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .exact import (
    SQRT3,
    CoordQ3,
    PointQ3,
    QSqrt3,
    cross,
    midpoint,
)

ROOT_VERTICES: tuple[PointQ3, PointQ3, PointQ3] = (
    PointQ3(CoordQ3(0), CoordQ3(0)),
    PointQ3(CoordQ3(1), CoordQ3(0)),
    PointQ3(CoordQ3(1, 0, 1), CoordQ3(0, 1, 1)),  # (1/2, sqrt(3)/2)
)

_VALID_SYMBOLS = frozenset("012")


def check_address(word: str) -> str:
    if not set(word) <= _VALID_SYMBOLS:
        raise ValueError(f"invalid address {word!r}: symbols must be 0, 1 or 2")
    return word


def child_vertices(vertices, symbol: int):
    """Vertices of the child triangle at the given corner.

    Vertex j of the child is the midpoint of v_j and v_symbol, so the
    corner vertex itself is fixed and labels are inherited.
    """
    anchor = vertices[symbol]
    return tuple(midpoint(v, anchor) for v in vertices)


def triangle_vertices(word: str) -> tuple[PointQ3, PointQ3, PointQ3]:
    """Exact vertices of the triangle addressed by ``word``.

    Pairwise distances are exactly 2**(-len(word)).
    """
    check_address(word)
    vs = ROOT_VERTICES
    for ch in word:
        vs = child_vertices(vs, int(ch))
    return vs


def as_field_pair(point) -> tuple[QSqrt3, QSqrt3]:
    """Lift a point to Q(sqrt(3)) coordinates.

    Accepts a PointQ3 or a pair of QSqrt3 / Fraction values, so points
    outside the dyadic ring (the centroid, for instance) can still be
    tested exactly.
    """
    if isinstance(point, PointQ3):
        return (QSqrt3.from_coord(point.x), QSqrt3.from_coord(point.y))
    x, y = point
    if not isinstance(x, QSqrt3):
        x = QSqrt3(Fraction(x))
    if not isinstance(y, QSqrt3):
        y = QSqrt3(Fraction(y))
    return (x, y)


def _field_cross(ox, oy, px, py, qx, qy) -> QSqrt3:
    return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)


def barycentric_weights(point, vertices) -> tuple[QSqrt3, QSqrt3, QSqrt3]:
    """Exact barycentric coordinates of ``point`` in the triangle."""
    a, b, c = vertices
    if isinstance(point, PointQ3):
        denom = QSqrt3.from_coord(cross(a, b, c))
        wb = QSqrt3.from_coord(cross(a, point, c)) / denom
        wc = QSqrt3.from_coord(cross(a, b, point)) / denom
    else:
        px, py = as_field_pair(point)
        ax, ay = as_field_pair(a)
        bx, by = as_field_pair(b)
        cx, cy = as_field_pair(c)
        denom = _field_cross(ax, ay, bx, by, cx, cy)
        wb = _field_cross(ax, ay, px, py, cx, cy) / denom
        wc = _field_cross(ax, ay, bx, by, px, py) / denom
    wa = QSqrt3(Fraction(1)) - wb - wc
    return (wa, wb, wc)


def contains_point(vertices, point) -> bool:
    """Closed-triangle membership, exact."""
    return all(w.sign() >= 0 for w in barycentric_weights(point, vertices))


def locate(point, level: int) -> str:
    """Address of a level-``level`` triangle containing ``point``.

    Ties on shared corners resolve to the smallest symbol, so the result
    is deterministic.  Raises ValueError when the point is outside the
    level-``level`` approximation of the fractal.
    """
    word = []
    vs = ROOT_VERTICES
    if not contains_point(vs, point):
        raise ValueError(f"point {point} lies outside the unit triangle")
    for _ in range(level):
        for sym in range(3):
            cand = child_vertices(vs, sym)
            if contains_point(cand, point):
                word.append(str(sym))
                vs = cand
                break
        else:
            raise ValueError(
                f"point {point} is outside the level-{level} approximation"
            )
    return "".join(word)


# ---------------------------------------------------------------------------
# boundary families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryFamilyL:
    """The 3*(2**l - 1) level-l triangles with an edge on the outer boundary."""

    l: int
    addresses: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.addresses)


def boundary_family(l: int) -> BoundaryFamilyL:
    """Level-l addresses whose triangle has an edge on the boundary.

    A level-l triangle keeps an edge on the outer edge between root
    vertices i and j exactly when its word uses only the symbols {i, j},
    so the family is enumerated combinatorially; cardinality is
    3*(2**l - 1).
    """
    if l < 1:
        raise ValueError("boundary family needs l >= 1")
    words: set[str] = set()
    for pair in ((0, 1), (0, 2), (1, 2)):
        syms = tuple(str(s) for s in pair)
        for combo in itertools.product(syms, repeat=l):
            words.add("".join(combo))
    out = tuple(sorted(words))
    assert len(out) == 3 * (2**l - 1)
    return BoundaryFamilyL(l=l, addresses=out)


def _edge_on_boundary_lines(p: PointQ3, q: PointQ3) -> bool:
    # bottom: y = 0;  left: sqrt(3)x - y = 0;  right: sqrt(3)x + y = sqrt(3)
    for f in (
        lambda v: v.y,
        lambda v: v.x * SQRT3 - v.y,
        lambda v: v.x * SQRT3 + v.y - SQRT3,
    ):
        if f(p).sign() == 0 and f(q).sign() == 0:
            return True
    return False


def has_boundary_edge(word: str) -> bool:
    """Geometric test: some edge lies on an edge of the unit triangle."""
    vs = triangle_vertices(word)
    return (
        _edge_on_boundary_lines(vs[0], vs[1])
        or _edge_on_boundary_lines(vs[1], vs[2])
        or _edge_on_boundary_lines(vs[0], vs[2])
    )


def iter_subdivision_addresses(n: int, l: int = 1):
    """Addresses of the n-th level of the boundary sub-fractal.

    Words of length n*l obtained by concatenating n boundary words;
    there are (3*(2**l - 1))**n of them.  With l = 1 this is the full
    family of 3**n level-n addresses.
    """
    if n < 0:
        raise ValueError("level must be >= 0")
    fam = boundary_family(l).addresses
    for combo in itertools.product(fam, repeat=n):
        yield "".join(combo)


def subdivision_addresses(n: int, l: int = 1, limit: int = 2_000_000) -> list[str]:
    count = (3 * (2**l - 1)) ** n
    if count > limit:
        raise ValueError(f"family of size {count} exceeds materialization limit")
    return list(iter_subdivision_addresses(n, l))


def vertex_table(level: int) -> set[PointQ3]:
    """All vertices of the level-``level`` triangles; |V_n| = (3**(n+1)+3)/2."""
    seen: set[PointQ3] = set(ROOT_VERTICES)
    stack = [(ROOT_VERTICES, 0)]
    while stack:
        vs, depth = stack.pop()
        if depth == level:
            continue
        for sym in range(3):
            ch = child_vertices(vs, sym)
            seen.update(ch)
            stack.append((ch, depth + 1))
    return seen


# ---------------------------------------------------------------------------
# the rescaled triangle and its similarity
# ---------------------------------------------------------------------------

RESCALED_VERTICES: tuple[tuple[QSqrt3, QSqrt3], ...] = (
    (QSqrt3(0), QSqrt3(0)),
    (QSqrt3(0, Fraction(2, 3)), QSqrt3(0)),          # (2/sqrt(3), 0)
    (QSqrt3(0, Fraction(1, 3)), QSqrt3(1)),          # (1/sqrt(3), 1)
)


@dataclass(frozen=True)
class Similarity:
    """Affine map x -> M x + t over Q(sqrt(3)), stored exactly."""

    m00: QSqrt3
    m01: QSqrt3
    m10: QSqrt3
    m11: QSqrt3
    t0: QSqrt3
    t1: QSqrt3
    scale_sq: Fraction

    def apply(self, point: PointQ3) -> tuple[QSqrt3, QSqrt3]:
        x = QSqrt3.from_coord(point.x)
        y = QSqrt3.from_coord(point.y)
        return (
            self.m00 * x + self.m01 * y + self.t0,
            self.m10 * x + self.m11 * y + self.t1,
        )

    def apply_height(self, point: PointQ3) -> QSqrt3:
        """Second coordinate of the image only (what the witness needs)."""
        x = QSqrt3.from_coord(point.x)
        y = QSqrt3.from_coord(point.y)
        return self.m10 * x + self.m11 * y + self.t1


def rescaling_similarity(word: str, labels: tuple[int, int, int] = (0, 1, 2)) -> Similarity:
    """Similarity sending the addressed triangle onto the rescaled one.

    ``labels`` picks which corner plays each role: corner ``labels[i]``
    is mapped to rescaled vertex i.  The scale factor is exactly
    2**len(word) * 2/sqrt(3) for any label permutation.
    """
    if sorted(labels) != [0, 1, 2]:
        raise ValueError(f"labels {labels!r} must be a permutation of (0, 1, 2)")
    vs = triangle_vertices(word)
    src = [vs[i] for i in labels]
    s0x, s0y = QSqrt3.from_coord(src[0].x), QSqrt3.from_coord(src[0].y)
    e1 = (QSqrt3.from_coord(src[1].x) - s0x, QSqrt3.from_coord(src[1].y) - s0y)
    e2 = (QSqrt3.from_coord(src[2].x) - s0x, QSqrt3.from_coord(src[2].y) - s0y)
    f1 = (RESCALED_VERTICES[1][0] - RESCALED_VERTICES[0][0],
          RESCALED_VERTICES[1][1] - RESCALED_VERTICES[0][1])
    f2 = (RESCALED_VERTICES[2][0] - RESCALED_VERTICES[0][0],
          RESCALED_VERTICES[2][1] - RESCALED_VERTICES[0][1])
    det = e1[0] * e2[1] - e1[1] * e2[0]
    if det.sign() == 0:
        raise ValueError("degenerate label assignment")
    # M [e1 e2] = [f1 f2]  =>  M = [f1 f2] [e1 e2]^{-1}
    inv00 = e2[1] / det
    inv01 = QSqrt3(0) - (e2[0] / det)
    inv10 = QSqrt3(0) - (e1[1] / det)
    inv11 = e1[0] / det
    m00 = f1[0] * inv00 + f2[0] * inv10
    m01 = f1[0] * inv01 + f2[0] * inv11
    m10 = f1[1] * inv00 + f2[1] * inv10
    m11 = f1[1] * inv01 + f2[1] * inv11
    t0 = RESCALED_VERTICES[0][0] - (m00 * s0x + m01 * s0y)
    t1 = RESCALED_VERTICES[0][1] - (m10 * s0x + m11 * s0y)
    n = len(word)
    scale_sq = Fraction(4, 3) * (4**n)
    sim = Similarity(m00, m01, m10, m11, t0, t1, scale_sq)
    # the map must scale every edge by exactly 2**n * 2/sqrt(3)
    for e in (e1, e2):
        img = (m00 * e[0] + m01 * e[1], m10 * e[0] + m11 * e[1])
        lhs = img[0] * img[0] + img[1] * img[1]
        rhs = (e[0] * e[0] + e[1] * e[1]) * QSqrt3(scale_sq)
        assert (lhs - rhs).sign() == 0
    return sim


# ---------------------------------------------------------------------------
# lattice counts for horizontal lines
# ---------------------------------------------------------------------------

def line_crossing_count(digits) -> int:
    """Construction triangles of the rescaled fractal crossed by a line.

    ``digits`` is the binary expansion prefix of the height y.  Working
    down one level per digit: a triangle spans a dyadic height interval;
    digit 1 selects the upper half where only the apex child lives,
    digit 0 the lower half holding two children.  The count after n
    digits is exactly 2**(number of zero digits).
    """
    count = 1
    for e in digits:
        if e == 0:
            count *= 2
        elif e != 1:
            raise ValueError(f"binary digits expected, got {e!r}")
    return count


def rescaled_construction_triangles(level: int):
    """Vertex triples of the rescaled-triangle construction at ``level``."""
    tris = [RESCALED_VERTICES]
    for _ in range(level):
        nxt = []
        for vs in tris:
            for sym in range(3):
                anchor = vs[sym]
                nxt.append(tuple(
                    ((v[0] + anchor[0]) * QSqrt3(Fraction(1, 2)),
                     (v[1] + anchor[1]) * QSqrt3(Fraction(1, 2)))
                    for v in vs
                ))
        tris = nxt
    return tris


def _check_line_height(y: Fraction, level: int) -> Fraction:
    y = Fraction(y)
    if not 0 < y < 1:
        raise ValueError("line height must be in (0, 1)")
    if (y * (1 << level)).denominator == 1:
        raise ValueError(
            f"height {y} is dyadic at depth {level}: the line hits lattice vertices"
        )
    return y


def line_crossing_count_geometric(y: Fraction, level: int) -> int:
    """Brute-force count of level-``level`` construction triangles crossed.

    Cross-checks the digit law by exact line/triangle intersection: the
    vertex heights are rational, so the open-interval test is exact.
    """
    y = _check_line_height(y, level)
    count = 0
    for vs in rescaled_construction_triangles(level):
        heights = [v[1].as_fraction() for v in vs]
        if min(heights) < y < max(heights):
            count += 1
    return count


@dataclass(frozen=True)
class LatticeTriangle:
    """One tile of the scaled triangular tiling of the plane.

    Upward tiles at scale n are i*w1 + j*w2 + {0, w1, w2} with
    w1 = 2**-n * (2/sqrt(3), 0) and w2 = 2**-n * (1/sqrt(3), 1); the
    downward tile with the same (row, col) fills the rhombus corner
    {w1, w2, w1+w2}.
    """

    n: int
    row: int
    col: int
    orientation: str  # "up" | "down"

    def vertices(self) -> tuple[tuple[QSqrt3, QSqrt3], ...]:
        s = Fraction(1, 1 << self.n)
        w1 = (QSqrt3(0, Fraction(2, 3) * s), QSqrt3(0))
        w2 = (QSqrt3(0, Fraction(1, 3) * s), QSqrt3(s))
        base = (w1[0] * self.col + w2[0] * self.row,
                w1[1] * self.col + w2[1] * self.row)
        if self.orientation == "up":
            offs = ((QSqrt3(0), QSqrt3(0)), w1, w2)
        elif self.orientation == "down":
            offs = (w1, w2, (w1[0] + w2[0], w1[1] + w2[1]))
        else:
            raise ValueError(f"bad orientation {self.orientation!r}")
        return tuple((base[0] + o[0], base[1] + o[1]) for o in offs)


def _rescaled_tile_index(vx: QSqrt3, vy: QSqrt3, n: int) -> tuple[int, int]:
    """(row, col) of the lattice point at (vx, vy), scale 2**-n."""
    s = Fraction(1, 1 << n)
    row = vy.as_fraction() / s
    # x = col * (2/sqrt(3)) * s + row * (1/sqrt(3)) * s, pure sqrt(3)/3 multiples
    col = (vx - QSqrt3(0, Fraction(1, 3) * s * row)) / QSqrt3(0, Fraction(2, 3) * s)
    row_i, col_i = Fraction(row), col.as_fraction()
    if row_i.denominator != 1 or col_i.denominator != 1:
        raise ValueError("point is not a lattice vertex at this scale")
    return (int(row_i), int(col_i))


def downward_tiles_touched(y: Fraction, level: int) -> set[LatticeTriangle]:
    """Downward lattice tiles meeting the level set of the height function.

    The level set is the line restricted to the fractal; it meets a
    downward tile only at edge-crossing points of crossed construction
    triangles (construction edges stay inside the fractal).  Exposed so
    the at-most-2x discrepancy with the upward count can be observed;
    the exact digit law is asserted for the upward count only.
    """
    y = _check_line_height(y, level)
    touched: set[LatticeTriangle] = set()
    for vs in rescaled_construction_triangles(level):
        heights = [v[1].as_fraction() for v in vs]
        if not (min(heights) < y < max(heights)):
            continue
        for i, j in ((0, 1), (1, 2), (0, 2)):
            hi_, hj_ = heights[i], heights[j]
            if (hi_ - y) * (hj_ - y) >= 0:
                continue
            # neighbor across the crossed edge: reflect the opposite vertex
            k = 3 - i - j
            rx = vs[i][0] + vs[j][0] - vs[k][0]
            ry = vs[i][1] + vs[j][1] - vs[k][1]
            # identify by its bottom vertex: the unique vertex at min height
            pts = [(vs[i][0], vs[i][1]), (vs[j][0], vs[j][1]), (rx, ry)]
            hs = [p[1].as_fraction() for p in pts]
            bottom = pts[hs.index(min(hs))]
            row, col = _rescaled_tile_index(bottom[0], bottom[1], level)
            # bottom vertex of a downward tile is base + w1 => col offset 1
            touched.add(LatticeTriangle(level, row, col - 1, "down"))
    return touched


# ---------------------------------------------------------------------------
# lattice indexing in unit-triangle coordinates (for measure cells)
# ---------------------------------------------------------------------------

def delta_lattice_index(word: str) -> tuple[int, int]:
    """(row, col) of a construction triangle in the side-2**-n lattice.

    Basis u1 = 2**-n (1, 0), u2 = 2**-n (1/2, sqrt(3)/2); the first
    vertex of any construction triangle is col*u1 + row*u2.
    """
    n = len(word)
    v1 = triangle_vertices(word)[0]
    row = v1.y.sqrt3_coefficient() * (1 << (n + 1))
    col = (v1.x.to_fraction() - Fraction(row, 1 << (n + 1))) * (1 << n)
    if row.denominator != 1 or col.denominator != 1:
        raise ValueError(f"triangle {word!r} is not lattice aligned")
    return (int(row), int(col))


_CELL_NEIGHBOR_OFFSETS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def touching_up_cells(row: int, col: int) -> list[tuple[int, int]]:
    """Upward cells sharing at least one lattice vertex with (row, col)."""
    return [(row + dr, col + dc) for dr, dc in _CELL_NEIGHBOR_OFFSETS]
