"""Entropy accounting for CHSH_q protocols.

Covers the pairwise-independent Hadamard-subcode retrieval task, the
per-index mutual information of the noisy sum channel, the binary-output
reduction, and the message-guessing reduction used to bound protocols
with long messages.  All logs are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import log2

import numpy as np

from .errors import InvalidInput, InvariantViolation, CapExceeded
from .field import Field
from .boxes import RegularBox, ErrorDist, compose_m

QM_CAP = 1 << 20   # largest enumerable input space q^m


# ---------------------------------------------------------------------------
# entropy and mutual information on explicit tables
# ---------------------------------------------------------------------------

def check_joint(table) -> np.ndarray:
    t = np.asarray(table, dtype=float)
    if (t < 0).any():
        raise InvalidInput("joint table has negative entries")
    if abs(t.sum() - 1.0) > 1e-12:
        raise InvalidInput("joint table does not sum to 1")
    return t


def entropy(dist) -> float:
    """Shannon entropy in bits; 0 log 0 = 0."""
    p = np.asarray(dist, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information(joint) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y) for a 2-d joint table."""
    t = check_joint(joint)
    if t.ndim != 2:
        raise InvalidInput("joint table must be 2-d")
    v = entropy(t.sum(axis=1)) + entropy(t.sum(axis=0)) - entropy(t)
    if v < -1e-9:
        raise InvariantViolation("mutual information came out negative")
    return max(v, 0.0)   # clamp float cancellation on near-independent tables


# ---------------------------------------------------------------------------
# the Hadamard subcode task
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HadamardTask:
    """Index vectors with first nonzero coordinate 1: one per projective
    direction, (q^m - 1)/(q - 1) in total.  The linear forms they induce
    on a uniform Y in F_q^m are pairwise independent."""
    field: Field
    m: int
    vectors: tuple[tuple[int, ...], ...]

    def had(self, y: tuple[int, ...], xi: tuple[int, ...]) -> int:
        f = self.field
        acc = 0
        for yi, xii in zip(y, xi):
            acc = f.add(acc, f.mul(xii, yi))
        return acc


def build_U_m(field: Field, m: int) -> HadamardTask:
    if m < 1:
        raise InvalidInput("m must be >= 1")
    q = field.q
    if q ** m > QM_CAP:
        raise CapExceeded(f"q^m exceeds enumeration cap {QM_CAP}")
    vectors = []
    for lead in range(m):
        for suffix in product(range(q), repeat=m - lead - 1):
            vectors.append((0,) * lead + (1,) + suffix)
    expected = (q ** m - 1) // (q - 1)
    if len(vectors) != expected:
        raise InvariantViolation("subcode has wrong size")
    return HadamardTask(field, m, tuple(vectors))


def _codeword_values(field: Field, m: int, xi) -> np.ndarray:
    """Had_xi over all q^m inputs Y, vectorized via op tables."""
    q = field.q
    if q ** m > QM_CAP:
        raise CapExceeded(f"q^m exceeds enumeration cap {QM_CAP}")
    add = np.array([[field.add(a, b) for b in range(q)] for a in range(q)])
    vals = np.zeros(q ** m, dtype=np.int64)
    for i, c in enumerate(xi):
        # coordinate Y_i cycles with period q^(m-1-i)
        block = q ** (m - 1 - i)
        coord = (np.arange(q ** m) // block) % q
        scaled = np.array([field.mul(c, v) for v in range(q)])[coord]
        vals = add[vals, scaled]
    return vals


def coordinates_pair_uniform(field: Field, m: int, xi1, xi2) -> bool:
    """True iff (Had_xi1(Y), Had_xi2(Y)) is exactly uniform on F_q^2."""
    q = field.q
    v1 = _codeword_values(field, m, xi1)
    v2 = _codeword_values(field, m, xi2)
    hist = np.bincount(v1 * q + v2, minlength=q * q)
    return bool((hist == q ** m // (q * q)).all())


def pairwise_independence_check(task: HadamardTask) -> bool:
    """Exhaustive check that all single coordinates are uniform and all
    pairs of distinct index vectors give jointly uniform codeword pairs."""
    field, m = task.field, task.m
    q = field.q
    if q ** m > QM_CAP:
        raise CapExceeded(f"q^m exceeds enumeration cap {QM_CAP}")
    values = [_codeword_values(field, m, xi) for xi in task.vectors]
    n = q ** m
    for v in values:
        if not (np.bincount(v, minlength=q) == n // q).all():
            return False
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            hist = np.bincount(values[i] * q + values[j], minlength=q * q)
            if not (hist == n // (q * q)).all():
                return False
    return True


# ---------------------------------------------------------------------------
# per-index channel and the IC sum
# ---------------------------------------------------------------------------

def joint_from_error(field: Field, err: ErrorDist) -> np.ndarray:
    """Joint table of (X, Z) with X uniform and Z = X + e, e ~ err."""
    q = field.q
    t = np.zeros((q, q))
    for x in range(q):
        for z in range(q):
            t[x, z] = float(err.probs[field.sub(z, x)]) / q
    return t


@dataclass(frozen=True)
class IcSumResult:
    m: int
    n_indices: int
    per_index_mi: float
    total: float


def ic_sum(field: Field, m: int, E) -> IcSumResult:
    """|U_m| times the MI of the m-fold composed channel, from first
    principles (joint table), not from any closed-form shortcut."""
    E = Fraction(E)
    if not 0 <= E <= 1:
        raise InvalidInput("bias must be in [0, 1] for the IC sum")
    err = compose_m(field, RegularBox(field.q, E), m)
    mi = mutual_information(joint_from_error(field, err))
    n = (field.q ** m - 1) // (field.q - 1)
    return IcSumResult(m=m, n_indices=n, per_index_mi=mi, total=n * mi)


def per_index_mi_closed_form(q: int, E, m: int) -> float:
    """Analytic MI of the composed channel, for cross-checking ic_sum:

        I = p0 log2(q p0) + (q-1) p1 log2(q p1)

    with p0 = 1/q + (q-1)E^m/q and p1 = (1 - E^m)/q.  Equivalently
    p0 log2(1 + (q-1)E^m) + ((q-1)(1-E^m)/q) log2(1-E^m)."""
    Em = float(Fraction(E) ** m)
    p0 = 1 / q + (q - 1) * Em / q
    p1 = (1 - Em) / q
    out = 0.0
    if p0 > 0:
        out += p0 * log2(q * p0)
    if p1 > 0:
        out += (q - 1) * p1 * log2(q * p1)
    return out


@dataclass(frozen=True)
class DichotomyResult:
    rows: tuple[IcSumResult, ...]
    verdict: str    # "bounded" | "growing" | "inconclusive"


def ic_dichotomy_experiment(field: Field, E, m_range) -> DichotomyResult:
    """Sweep ic_sum over m and classify the tail of the totals.

    "bounded": last three totals nonincreasing; "growing": last three
    strictly increasing with ratio >= 1.1 at each step.  The crossover
    sits at q E^2 = 1, i.e. E = q^(-1/2)."""
    ms = list(m_range)
    if len(ms) < 3:
        raise InvalidInput("need at least three m values to classify")
    rows = tuple(ic_sum(field, m, E) for m in ms)
    t = [r.total for r in rows[-3:]]
    if t[0] >= t[1] >= t[2]:
        verdict = "bounded"
    elif t[1] >= 1.1 * t[0] and t[2] >= 1.1 * t[1]:
        verdict = "growing"
    else:
        verdict = "inconclusive"
    return DichotomyResult(rows=rows, verdict=verdict)


# ---------------------------------------------------------------------------
# binary-output reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryReduction:
    f: tuple[int, ...]        # indicator of the selected output symbol
    achieved_mi: float        # I(X; f(Y))
    source_mi: float          # I(X; Y)


def binary_reduction_select(joint) -> BinaryReduction:
    """Collapse Y to one bit while keeping a 1/|B| fraction of the MI.

    Requires X uniform.  Writing r_j = Pr[Y=j] and t_j = H(X|Y=j)/H(X),
    the information s = I(X;Y)/H(X) equals sum_j r_j (1 - t_j), so some
    j* has r_j*(1 - t_j*) >= s/|B|; f = [Y = j*] then achieves
    I(X; f(Y)) >= I(X;Y)/|B|."""
    t = check_joint(joint)
    if t.ndim != 2:
        raise InvalidInput("joint table must be 2-d")
    na, nb = t.shape
    row = t.sum(axis=1)
    if not np.allclose(row, 1.0 / na, atol=1e-9):
        raise InvalidInput("X marginal must be uniform")
    source = mutual_information(t)
    hx = log2(na)
    if hx == 0.0:
        return BinaryReduction(f=(0,) * nb, achieved_mi=0.0, source_mi=source)
    r = t.sum(axis=0)
    score = np.full(nb, -1.0)
    for j in range(nb):
        if r[j] <= 0:
            continue
        tj = entropy(t[:, j] / r[j]) / hx
        score[j] = r[j] * (1.0 - tj)
    j_star = int(np.argmax(score))
    f = tuple(1 if j == j_star else 0 for j in range(nb))
    collapsed = np.stack([t[:, [j for j in range(nb) if f[j] == 0]].sum(axis=1),
                          t[:, [j for j in range(nb) if f[j] == 1]].sum(axis=1)],
                         axis=1)
    return BinaryReduction(f=f, achieved_mi=mutual_information(collapsed),
                           source_mi=source)


# ---------------------------------------------------------------------------
# message-guessing reduction (one shared uniform guess at the message)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelProtocol:
    """A one-round classical protocol: X ~ x_dist, message alpha ~ msg[x],
    receiver output z ~ dec[alpha]."""
    x_dist: tuple[float, ...]
    msg: tuple[tuple[float, ...], ...]    # |A| x |Sigma| rows
    dec: tuple[tuple[float, ...], ...]    # |Sigma| x |Lambda| rows

    def __post_init__(self):
        if len(self.msg) != len(self.x_dist):
            raise InvalidInput("msg needs one row per input symbol")
        widths = {len(r) for r in self.msg}
        if len(widths) != 1 or widths.pop() != len(self.dec):
            raise InvalidInput("msg columns must match dec rows")
        for dist in (self.x_dist, *self.msg, *self.dec):
            if any(v < 0 for v in dist) or abs(sum(dist) - 1.0) > 1e-12:
                raise InvalidInput("protocol rows must be distributions")

    @property
    def n_messages(self) -> int:
        return len(self.dec)

    @property
    def n_outputs(self) -> int:
        return len(self.dec[0])

    def joint_xz(self) -> np.ndarray:
        x = np.array(self.x_dist)
        m = np.array(self.msg)
        d = np.array(self.dec)
        return x[:, None] * (m @ d)


def copy_protocol(n: int) -> ChannelProtocol:
    """Noiseless protocol: message = input = output, X uniform on n symbols."""
    eye = tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n))
    return ChannelProtocol(x_dist=(1.0 / n,) * n, msg=eye, dec=eye)


@dataclass(frozen=True)
class CstarStats:
    samples: int
    p1_hat: float             # empirical Pr[guess matched]
    p1_expected: float        # 1/|Sigma|
    p1_stderr: float
    cond_joint: np.ndarray    # empirical (X, Z~) given a match
    mi_cond: float            # MI of cond_joint
    mi_original: float        # MI of the protocol's true (X, Z)
    mi_tolerance: float       # 3-sigma allowance for |mi_cond - mi_original|


def cstar_exact(protocol: ChannelProtocol):
    """Analytic facts about the guessing reduction: match probability is
    exactly 1/|Sigma|; given a match the joint of (X, Z~) is the original
    channel joint; given a miss, Z~ is uniform and independent of X."""
    sigma = protocol.n_messages
    p1 = Fraction(1, sigma)
    cond1 = protocol.joint_xz()
    x = np.array(protocol.x_dist)
    cond0 = np.repeat(x[:, None] / protocol.n_outputs, protocol.n_outputs, axis=1)
    return p1, cond1, cond0


def simulate_cstar(protocol: ChannelProtocol, samples: int = 10 ** 5,
                   seed: int = 0) -> CstarStats:
    """Run the reduction: draw a shared uniform guess at the message,
    hand over the prepared output only when the guess matches, otherwise
    output uniform noise.  Deterministic per seed."""
    if samples < 1:
        raise InvalidInput("samples must be >= 1")
    rng = np.random.default_rng(seed)
    na = len(protocol.x_dist)
    sigma = protocol.n_messages
    nl = protocol.n_outputs

    x = rng.choice(na, size=samples, p=np.array(protocol.x_dist))
    guess = rng.integers(0, sigma, size=samples)
    alpha = np.empty(samples, dtype=np.int64)
    for xv in range(na):                      # fixed order keeps this seeded
        mask = x == xv
        alpha[mask] = rng.choice(sigma, size=int(mask.sum()),
                                 p=np.array(protocol.msg[xv]))
    z_bar = np.empty(samples, dtype=np.int64)
    for av in range(sigma):
        mask = guess == av
        z_bar[mask] = rng.choice(nl, size=int(mask.sum()),
                                 p=np.array(protocol.dec[av]))
    matched = alpha == guess
    z = np.where(matched, z_bar, rng.integers(0, nl, size=samples))

    n1 = int(matched.sum())
    p1_hat = n1 / samples
    p1 = 1.0 / sigma
    p1_stderr = (p1 * (1 - p1) / samples) ** 0.5

    hist = np.zeros((na, nl))
    np.add.at(hist, (x[matched], z[matched]), 1.0)
    cond = hist / max(n1, 1)
    true_joint = protocol.joint_xz()
    mi_cond = mutual_information(cond) if n1 else 0.0
    mi_orig = mutual_information(true_joint)
    mi_tol = 3.0 * (_llr_std(true_joint) / max(n1, 1) ** 0.5
                    + na * nl / (max(n1, 1) * np.log(2)))
    return CstarStats(samples=samples, p1_hat=p1_hat, p1_expected=p1,
                      p1_stderr=p1_stderr, cond_joint=cond, mi_cond=mi_cond,
                      mi_original=mi_orig, mi_tolerance=mi_tol)


def _llr_std(joint: np.ndarray) -> float:
    """Std of log2(p(x,z)/(p(x)p(z))) under the joint: the per-sample
    fluctuation of the plug-in MI estimate (zero for a noiseless copy)."""
    px = joint.sum(axis=1)
    pz = joint.sum(axis=0)
    mask = joint > 0
    llr = np.zeros_like(joint)
    llr[mask] = np.log2(joint[mask] / (px[:, None] * pz[None, :])[mask])
    mean = (joint * llr).sum()
    var = (joint * (llr - mean) ** 2).sum()
    return float(var ** 0.5)
