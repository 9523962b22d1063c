"""Point-line incidences over F_q^2 and PG(2,q).

Strategies and configurations are two views of the same object: the
strategy (f, g) corresponds to points {(x, f(x))} and lines
{l_{y, g(y)}}, where l_{a,b} = {(z1, z2): z2 = a*z1 - b}, and winning
input pairs correspond exactly to incidences.

A configuration is "legal" when it fits back into a strategy: at most q
points with pairwise distinct x-coordinates and at most q non-vertical
lines with pairwise distinct slopes.  The projective machinery at the
bottom of this module exists to push an arbitrary configuration into
legal position by a random change of chart.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, InvariantViolation
from .field import Field
from .game import Strategy


class Line(NamedTuple):
    """The non-vertical affine line z2 = a*z1 - b."""
    a: int
    b: int


@dataclass(frozen=True)
class Config:
    points: tuple[tuple[int, int], ...]
    lines: tuple[Line, ...]


def make_config(points, lines) -> Config:
    """Normalize to sorted duplicate-free tuples."""
    pts = tuple(sorted({(int(x), int(y)) for x, y in points}))
    lns = tuple(sorted({Line(int(a), int(b)) for a, b in lines}))
    return Config(points=pts, lines=lns)


def is_legal(field: Field, c: Config) -> bool:
    q = field.q
    xs = [p[0] for p in c.points]
    slopes = [l.a for l in c.lines]
    return (len(c.points) <= q and len(c.lines) <= q
            and len(set(xs)) == len(xs) and len(set(slopes)) == len(slopes))


def incidences(field: Field, c: Config) -> int:
    """Exact |{(p, l): p on l}|, grouped by x-coordinate for speed."""
    by_x: dict[int, set[int]] = {}
    for x, y in c.points:
        by_x.setdefault(x, set()).add(y)
    count = 0
    for a, b in c.lines:
        for x, ys in by_x.items():
            if field.sub(field.mul(a, x), b) in ys:
                count += 1
    return count


# ---------------------------------------------------------------------------
# strategy <-> configuration
# ---------------------------------------------------------------------------

def strategy_to_config(field: Field, s: Strategy) -> Config:
    """Points (x, f(x)) and lines l_{y, g(y)}; incidences equal game wins."""
    f, g = s
    points = [(x, f[x]) for x in field.elements()]
    lines = [Line(y, g[y]) for y in field.elements()]
    return make_config(points, lines)


def config_to_strategy(field: Field, c: Config) -> Strategy:
    """Inverse of strategy_to_config on legal configs, padding gaps with 0.

    Padding never removes an incidence among the original pairs, so the
    resulting strategy wins at least incidences(c) input pairs.
    """
    if not is_legal(field, c):
        raise InvalidInput("config is not legal (sizes or duplicate x/slope)")
    q = field.q
    f = [0] * q
    g = [0] * q
    for x, y in c.points:
        f[x] = y
    for a, b in c.lines:
        g[a] = b
    return Strategy(tuple(f), tuple(g))


# ---------------------------------------------------------------------------
# explicit high-incidence constructions
# ---------------------------------------------------------------------------

def subfield_construction(field: Field) -> Config:
    """Points K x K and lines with slope and shift in K, for K the index-2 subfield.

    Every line hits exactly |K| = sqrt(q) points (c*a - d stays in K), so
    the q lines and q points produce q^(3/2) incidences.
    """
    if field.s % 2 != 0:
        raise InvalidInput("subfield construction needs even s")
    K = field.subfield_elements(field.s // 2)
    points = [(x, y) for x in K for y in K]
    lines = [Line(c, d) for c in K for d in K]
    return make_config(points, lines)


def grid_construction(field: Field) -> Config:
    """Integer grid [n1] x [n2] with shallow integer lines, n1 = floor(q^(1/3)).

    All arithmetic stays below q, so incidences can be counted over the
    integers: every (line, column) pair contributes exactly one.
    """
    if field.s != 1:
        raise InvalidInput("grid construction needs prime q")
    q = field.q
    n1 = _icbrt(q)
    n2 = _ifloor_pow(q, 2, 3)
    points = [(x, y) for x in range(1, n1 + 1) for y in range(1, n2 + 1)]
    # y = c*x + d over the integers; as l_{a,b} that is a = c, b = -d mod q
    lines = [Line(c, (-d) % q)
             for c in range(1, n1 // 2 + 1) for d in range(1, n2 // 2 + 1)]
    return make_config(points, lines)


def grid_expected_incidences(q: int) -> int:
    """Closed form |L| * floor(q^(1/3)) for the grid construction."""
    n1 = _icbrt(q)
    n2 = _ifloor_pow(q, 2, 3)
    return (n1 // 2) * (n2 // 2) * n1


def _icbrt(n: int) -> int:
    r = round(n ** (1 / 3))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def _ifloor_pow(n: int, num: int, den: int) -> int:
    # floor(n^(num/den)) without float edge cases
    r = round(n ** (num / den))
    while r ** den > n ** num:
        r -= 1
    while (r + 1) ** den <= n ** num:
        r += 1
    return r


def subspace_construction(field: Field, seed: int = 0) -> Config:
    """Span-based construction for odd-degree extensions.

    With g a primitive element, A, B, C are F_p-spans of initial segments
    of powers of g with dim A = a, dim B = b, dim C = b - a + 1, a = s - b.
    Points are A x B, lines have slope in C and shift in B, so slope times
    abscissa lands back in B and every (z1, c, d) triple is an incidence:
    pre-thinning I = |A| |B| |C|.

    For s = 3k and s = 3k+1 there are p or p^2 times too many lines, and
    the line set is thinned by keeping each line independently with
    probability 1/p or 1/p^2 (seeded).  For s = 3k+2 the count is already
    right and no thinning happens.
    """
    s = field.s
    if s % 2 == 0 or s < 3:
        raise InvalidInput("subspace construction needs odd s >= 3")
    p = field.p
    k, r = divmod(s, 3)
    if r == 0:
        b, keep = 2 * k, Fraction(1, p)
    elif r == 1:
        b, keep = 2 * k + 1, Fraction(1, p * p)
    else:
        b, keep = 2 * k + 1, Fraction(1)
    a = s - b
    g = field.primitive_element()
    A = _span(field, a)
    B = _span(field, b)
    C = _span(field, b - a + 1)
    points = [(x, y) for x in A for y in B]
    lines = [Line(c, d) for c in C for d in B]
    if keep != 1:
        rng = random.Random(seed)
        lines = [l for l in lines if rng.random() < keep]
    return make_config(points, lines)


def subspace_cardinalities(field: Field) -> tuple[int, int, int]:
    """(|A|, |B|, |C|) for the subspace construction; |C| = p^(2b-s+1)."""
    s, p = field.s, field.p
    if s % 2 == 0 or s < 3:
        raise InvalidInput("subspace construction needs odd s >= 3")
    k, r = divmod(s, 3)
    b = 2 * k if r == 0 else 2 * k + 1
    a = s - b
    return p ** a, p ** b, p ** (2 * b - s + 1)


def _span(field: Field, dim: int) -> list[int]:
    """All F_p-combinations of 1, g, ..., g^(dim-1), g primitive.  Sorted."""
    g = field.primitive_element()
    basis = [field.pow(g, i) for i in range(dim)]
    out = {0}
    for v in basis:
        scaled = [field.mul(c, v) for c in range(field.p)]
        out = {field.add(x, sv) for x in out for sv in scaled}
    if len(out) != field.p ** dim:
        raise InvariantViolation("span basis is linearly dependent")
    return sorted(out)


def trivial_incidence_bound(n_points: int, n_lines: int) -> float:
    """The counting bound |P|^(3/4) |L|^(3/4) + |P| + |L|."""
    if n_points < 0 or n_lines < 0:
        raise InvalidInput("counts must be nonnegative")
    return n_points ** 0.75 * n_lines ** 0.75 + n_points + n_lines


# ---------------------------------------------------------------------------
# PG(2,q): canonical homogeneous triples
# ---------------------------------------------------------------------------
# Points and lines are both stored as canonical triples (first nonzero
# coordinate scaled to 1); a point v lies on a line u iff u . v = 0.

def proj_canonical(field: Field, v: tuple[int, int, int]) -> tuple[int, int, int]:
    for i in range(3):
        if v[i]:
            inv = field.inv(v[i])
            return tuple(field.mul(inv, c) for c in v)
    raise InvalidInput("zero triple has no projective class")


def all_proj_points(field: Field) -> list[tuple[int, int, int]]:
    q = field.q
    pts = [(1, y, z) for y in range(q) for z in range(q)]
    pts += [(0, 1, z) for z in range(q)]
    pts.append((0, 0, 1))
    return pts


all_proj_lines = all_proj_points   # duality: same canonical triples


def proj_dot(field: Field, u, v) -> int:
    acc = 0
    for ui, vi in zip(u, v):
        acc = field.add(acc, field.mul(ui, vi))
    return acc


def proj_cross(field: Field, u, v) -> tuple[int, int, int]:
    """Cross product; as triples, the line through two points (or dually)."""
    c = (
        field.sub(field.mul(u[1], v[2]), field.mul(u[2], v[1])),
        field.sub(field.mul(u[2], v[0]), field.mul(u[0], v[2])),
        field.sub(field.mul(u[0], v[1]), field.mul(u[1], v[0])),
    )
    if c == (0, 0, 0):
        raise InvalidInput("triples are proportional; no unique join/meet")
    return proj_canonical(field, c)


def points_on_line(field: Field, line: tuple[int, int, int]) -> list[tuple[int, int, int]]:
    return [p for p in all_proj_points(field) if proj_dot(field, line, p) == 0]


def projective_plane_census(field: Field) -> tuple[int, int, int]:
    """(#points, #lines, points per line); enumerated and checked for q <= 16."""
    q = field.q
    n = q * q + q + 1
    if q <= 16:
        pts = all_proj_points(field)
        lns = all_proj_lines(field)
        if len(pts) != n or len(lns) != n:
            raise InvariantViolation("projective census mismatch")
        if len({p for p in pts}) != n:
            raise InvariantViolation("canonical points not distinct")
        for line in lns:
            if sum(proj_dot(field, line, p) == 0 for p in pts) != q + 1:
                raise InvariantViolation("line with wrong point count")
    return n, n, q + 1


def lift_config(field: Field, c: Config):
    """Affine -> projective: (x, y) -> (x:y:1); l_{a,b} -> coefficients (a:-1:-b)."""
    pts = [proj_canonical(field, (x, y, 1)) for x, y in c.points]
    lns = [proj_canonical(field, (a, field.neg(1), field.neg(b))) for a, b in c.lines]
    return pts, lns


def projective_incidences(field: Field, pts, lns) -> int:
    return sum(proj_dot(field, l, p) == 0 for l in lns for p in pts)


class ProjTransform:
    """Invertible 3x3 matrix acting on PG(2,q).

    Points transform by v -> M v and lines by u -> u M^(-1), which keeps
    u . v invariant, so incidence counts are preserved exactly.
    """

    def __init__(self, field: Field, rows):
        self.field = field
        self.rows = tuple(tuple(int(c) for c in row) for row in rows)
        if len(self.rows) != 3 or any(len(r) != 3 for r in self.rows):
            raise InvalidInput("transform needs a 3x3 matrix")
        det, adj = _det_adjugate(field, self.rows)
        if det == 0:
            raise InvalidInput("transform matrix is singular")
        inv_det = field.inv(det)
        self.inv_rows = tuple(
            tuple(field.mul(inv_det, adj[i][j]) for j in range(3)) for i in range(3)
        )

    def apply_point(self, v):
        f = self.field
        out = tuple(
            _dot3(f, self.rows[i], v) for i in range(3)
        )
        return proj_canonical(f, out)

    def apply_line(self, u):
        f = self.field
        out = tuple(
            _dot3(f, u, tuple(self.inv_rows[i][j] for i in range(3))) for j in range(3)
        )
        return proj_canonical(f, out)

    @classmethod
    def from_chart(cls, field: Field, l_inf, v_inf) -> "ProjTransform":
        """Transform sending l_inf to the standard line at infinity {z=0}
        and v_inf (a point on l_inf) to the vertical direction (0:1:0)."""
        if proj_dot(field, l_inf, v_inf) != 0:
            raise InvalidInput("v_inf must lie on l_inf")
        w = next(p for p in points_on_line(field, l_inf) if p != v_inf)
        u = next(p for p in all_proj_points(field)
                 if proj_dot(field, l_inf, p) != 0)
        # columns of B are the preimages of the standard frame e1, e2, e3
        B = tuple(tuple(col[i] for col in (w, v_inf, u)) for i in range(3))
        det, adj = _det_adjugate(field, B)
        inv_det = field.inv(det)
        M = tuple(tuple(field.mul(inv_det, adj[i][j]) for j in range(3))
                  for i in range(3))
        return cls(field, M)


def _dot3(field: Field, u, v) -> int:
    return field.add(field.add(field.mul(u[0], v[0]), field.mul(u[1], v[1])),
                     field.mul(u[2], v[2]))


def _det_adjugate(field: Field, m):
    f = field
    def mul(a, b): return f.mul(a, b)
    def sub(a, b): return f.sub(a, b)
    c00 = sub(mul(m[1][1], m[2][2]), mul(m[1][2], m[2][1]))
    c01 = sub(mul(m[1][2], m[2][0]), mul(m[1][0], m[2][2]))
    c02 = sub(mul(m[1][0], m[2][1]), mul(m[1][1], m[2][0]))
    det = f.add(f.add(mul(m[0][0], c00), mul(m[0][1], c01)), mul(m[0][2], c02))
    # adjugate: transpose of cofactors
    adj = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = sub(mul(m[r[0]][c[0]], m[r[1]][c[1]]),
                        mul(m[r[0]][c[1]], m[r[1]][c[0]]))
            adj[i][j] = minor if (i + j) % 2 == 0 else f.neg(minor)
    return det, tuple(tuple(row) for row in adj)


def all_transforms(field: Field):
    """Every element of PGL_3(q), one matrix per projective class.

    The first column runs over canonical points, which fixes the overall
    scalar; later columns run over all vectors outside the span of the
    earlier ones.  Yields (q^2+q+1)(q^3-q)(q^3-q^2) transforms.
    """
    q = field.q
    vectors = [(a, b, c) for a in range(q) for b in range(q) for c in range(q)][1:]
    for c1 in all_proj_points(field):
        span1 = {tuple(field.mul(t, x) for x in c1) for t in range(1, q)}
        for c2 in vectors:
            if c2 in span1:
                continue
            span2 = set()
            for t1 in range(q):
                v1 = tuple(field.mul(t1, x) for x in c1)
                for t2 in range(q):
                    span2.add(tuple(field.add(v1[i], field.mul(t2, c2[i]))
                                    for i in range(3)))
            for c3 in vectors:
                if c3 in span2:
                    continue
                rows = tuple((c1[i], c2[i], c3[i]) for i in range(3))
                yield ProjTransform(field, rows)


def random_transform(field: Field, rng: random.Random) -> ProjTransform:
    """Uniform invertible matrix by rejection (not uniform over PGL classes,
    but every class is reachable; good enough for sampling checks)."""
    q = field.q
    while True:
        rows = tuple(tuple(rng.randrange(q) for _ in range(3)) for _ in range(3))
        det, _ = _det_adjugate(field, rows)
        if det != 0:
            return ProjTransform(field, rows)


def verify_incidence_preservation_exhaustive(field: Field, c: Config) -> int:
    """Assert that every element of PGL_3(q) preserves the projective
    incidence count of the lifted configuration; returns the group order.

    Vectorized over the third matrix column: points transform as the column
    combination M v = v0*c1 + v1*c2 + v2*c3, and each line transforms as the
    join of two of its transformed points, so no inverses are needed.  All
    field arithmetic goes through lookup tables, which keeps this usable for
    extension fields as well as primes.
    """
    q = field.q
    if q > 9:
        raise InvalidInput("exhaustive transform sweep capped at q <= 9")
    add = np.array([[field.add(a, b) for b in range(q)] for a in range(q)])
    mul = np.array([[field.mul(a, b) for b in range(q)] for a in range(q)])
    sub = np.array([[field.sub(a, b) for b in range(q)] for a in range(q)])

    pts, lns = lift_config(field, c)
    base = projective_incidences(field, pts, lns)
    anchors = []
    for l in lns:
        on = points_on_line(field, l)
        anchors.append((on[0], on[1]))   # every line has q+1 >= 2 points
    n_pts, n_lns = len(pts), len(lns)
    src = np.array(pts + [p for pair in anchors for p in pair])  # (ns, 3)

    vectors = np.array([(a, b, c3) for a in range(q) for b in range(q)
                        for c3 in range(q)][1:])
    enc = vectors[:, 0] + q * vectors[:, 1] + q * q * vectors[:, 2]
    checked = 0
    for c1 in all_proj_points(field):
        c1v = np.array(c1)
        span1 = {int(mul[t, c1[0]] + q * mul[t, c1[1]] + q * q * mul[t, c1[2]])
                 for t in range(1, q)}
        x1 = mul[src[:, 0][:, None], c1v[None, :]]               # (ns, 3)
        for c2 in vectors[~np.isin(enc, sorted(span1))]:
            t1 = np.arange(q)
            s2 = add[mul[t1[:, None, None], c1v[None, None, :]],
                     mul[t1[None, :, None], c2[None, None, :]]].reshape(-1, 3)
            span2 = s2[:, 0] + q * s2[:, 1] + q * q * s2[:, 2]
            c3s = vectors[~np.isin(enc, span2)]                  # (m, 3)
            x12 = add[x1, mul[src[:, 1][:, None], c2[None, :]]]  # (ns, 3)
            x3 = mul[src[:, 2][:, None, None], c3s[None, :, :]]  # (ns, m, 3)
            img = add[x12[:, None, :], x3]                       # (ns, m, 3)
            pi = img[:n_pts]
            ai = img[n_pts:].reshape(n_lns, 2, -1, 3)
            u, v = ai[:, 0], ai[:, 1]                            # (nl, m, 3)
            li = np.stack([
                sub[mul[u[..., 1], v[..., 2]], mul[u[..., 2], v[..., 1]]],
                sub[mul[u[..., 2], v[..., 0]], mul[u[..., 0], v[..., 2]]],
                sub[mul[u[..., 0], v[..., 1]], mul[u[..., 1], v[..., 0]]],
            ], axis=-1)                                          # (nl, m, 3)
            d = add[add[mul[li[:, None, :, 0], pi[None, :, :, 0]],
                        mul[li[:, None, :, 1], pi[None, :, :, 1]]],
                    mul[li[:, None, :, 2], pi[None, :, :, 2]]]   # (nl, np, m)
            counts = (d == 0).sum(axis=(0, 1))
            if not np.all(counts == base):
                raise InvariantViolation("incidence count changed under a transform")
            checked += len(c3s)
    order = (q * q + q + 1) * (q ** 3 - q) * (q ** 3 - q * q)
    if checked != order:
        raise InvariantViolation("transform enumeration incomplete")
    return checked


# ---------------------------------------------------------------------------
# random projective regularization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegularizationStats:
    input_points: int
    input_lines: int
    input_incidences: int
    sampled_points: int
    sampled_lines: int
    sampled_incidences: int
    kept_points: int
    kept_lines: int
    kept_incidences: int
    l_inf: tuple[int, int, int]
    v_inf: tuple[int, int, int]


def random_projective_regularize(field: Field, c: Config, seed: int,
                                 downsample: bool = True
                                 ) -> tuple[Config, RegularizationStats]:
    """Push an arbitrary configuration into legal position by a random chart.

    Steps: optionally downsample so |P|, |L| <= q/2; lift to PG(2,q); draw a
    uniform line l_inf and a uniform point v_inf on it; change chart so l_inf
    becomes the line at infinity and v_inf the vertical direction; drop input
    lines equal to l_inf, points on l_inf, and lines through v_inf (vertical
    in the new chart, hence not expressible as l_{a,b}); finally keep one
    point per x-coordinate and one line per slope, first in canonical order.
    """
    q = field.q
    rng = random.Random(seed)
    in_inc = incidences(field, c)

    points = list(c.points)
    lines = list(c.lines)
    if downsample:
        cap = q // 2
        if len(points) > cap:
            points = sorted(rng.sample(points, cap))
        if len(lines) > cap:
            lines = sorted(rng.sample(lines, cap))
    sampled = make_config(points, lines)
    s_inc = incidences(field, sampled)

    all_lines = all_proj_lines(field)
    l_inf = all_lines[rng.randrange(len(all_lines))]
    on_l_inf = points_on_line(field, l_inf)
    v_inf = on_l_inf[rng.randrange(len(on_l_inf))]
    T = ProjTransform.from_chart(field, l_inf, v_inf)

    pts, lns = lift_config(field, sampled)
    new_pts = []
    for p in pts:
        if proj_dot(field, l_inf, p) == 0:
            continue                      # sent to infinity
        X, Y, Z = T.apply_point(p)
        zi = field.inv(Z)
        new_pts.append((field.mul(X, zi), field.mul(Y, zi)))
    new_lns = []
    for l in lns:
        if l == l_inf:
            continue                      # became the line at infinity
        L, M, N = T.apply_line(l)
        if M == 0:
            continue                      # vertical in the new chart
        mi = field.inv(field.neg(M))      # l x + m y + n = 0  ->  y = a x - b
        new_lns.append(Line(field.mul(L, mi), field.mul(field.neg(N), mi)))

    by_x: dict[int, int] = {}
    for x, y in sorted(new_pts):
        by_x.setdefault(x, y)
    by_slope: dict[int, int] = {}
    for a, b in sorted(new_lns):
        by_slope.setdefault(a, b)
    out = make_config([(x, y) for x, y in by_x.items()],
                      [Line(a, b) for a, b in by_slope.items()])
    if not is_legal(field, out):
        raise InvariantViolation("regularized config is not legal")
    stats = RegularizationStats(
        input_points=len(c.points), input_lines=len(c.lines),
        input_incidences=in_inc,
        sampled_points=len(sampled.points), sampled_lines=len(sampled.lines),
        sampled_incidences=s_inc,
        kept_points=len(out.points), kept_lines=len(out.lines),
        kept_incidences=incidences(field, out),
        l_inf=l_inf, v_inf=v_inf,
    )
    return out, stats


def slope_collision_probability(field: Field, l1: Line, l2: Line) -> Fraction:
    """Probability that a uniform chart draw gives two fixed lines equal slope.

    The draw runs over all lines at infinity other than (the lift of) l1;
    the lines collide in slope exactly when the chosen line passes through
    their intersection point.  The count includes the draw where l2 itself
    becomes the line at infinity, which comes out to exactly 1/(q+1).
    """
    if l1 == l2:
        raise InvalidInput("lines must be distinct")
    lifted1 = proj_canonical(field, (l1.a, field.neg(1), field.neg(l1.b)))
    lifted2 = proj_canonical(field, (l2.a, field.neg(1), field.neg(l2.b)))
    meet = proj_cross(field, lifted1, lifted2)
    hits = 0
    total = 0
    for cand in all_proj_lines(field):
        if cand == lifted1:
            continue
        total += 1
        if proj_dot(field, cand, meet) == 0:
            hits += 1
    return Fraction(hits, total)
