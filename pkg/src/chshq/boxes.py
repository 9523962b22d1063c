"""Noisy boxes for CHSH_q as exact error channels.

A box is summarized by the distribution of its error e = a + b - x*y.
A box is regular when that distribution does not depend on the inputs
and is uniform off zero; a single rational bias E then determines it:

    p(0) = 1/q + (q-1)E/q,    p(k != 0) = 1/q - E/q

Every deterministic strategy can be wrapped (shared randomness relabeling
inputs and correcting outputs) into a regular box with the same winning
probability, which is what regularize() computes, exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInput, InvariantViolation
from .field import Field
from .game import Strategy, GameValue, win_count, bias_from_p_win, p_win_from_bias


@dataclass(frozen=True)
class ErrorDist:
    """Exact pmf of the error over F_q, indexed by encoding."""
    q: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.probs) != self.q:
            raise InvalidInput("pmf length must equal q")
        if any(p < 0 for p in self.probs):
            raise InvalidInput("pmf entries must be nonnegative")
        if sum(self.probs) != 1:
            raise InvalidInput("pmf entries must sum to exactly 1")

    def p_win(self) -> Fraction:
        return self.probs[0]

    def is_regular(self) -> bool:
        off = set(self.probs[1:])
        return len(off) <= 1

    def bias(self) -> Fraction:
        """Bias of the induced regular box; error if not regular."""
        if not self.is_regular():
            raise InvalidInput("distribution is not regular")
        return bias_from_p_win(self.q, self.probs[0])


@dataclass(frozen=True)
class RegularBox:
    q: int
    bias: Fraction

    def __post_init__(self):
        E = Fraction(self.bias)
        object.__setattr__(self, "bias", E)
        if not -Fraction(1, self.q - 1) <= E <= 1:
            raise InvalidInput(f"bias {E} outside [-1/(q-1), 1]")

    def error_dist(self) -> ErrorDist:
        q, E = self.q, self.bias
        p0 = Fraction(1, q) + Fraction(q - 1, q) * E
        pk = Fraction(1, q) - E / q
        return ErrorDist(q, (p0,) + (pk,) * (q - 1))

    def p_win(self) -> Fraction:
        return p_win_from_bias(self.q, self.bias)


@dataclass(frozen=True)
class StrategyBox:
    strategy: Strategy

    def error_at(self, field: Field, x: int, y: int) -> int:
        f, g = self.strategy
        return field.sub(field.add(f[x], g[y]), field.mul(x, y))


# ---------------------------------------------------------------------------
# regularization wrapper
# ---------------------------------------------------------------------------

def per_input_error_dists(field: Field, box: StrategyBox) -> list[list[Fraction]]:
    """Error pmf of the wrapped strategy for each input pair (x, y).

    The wrapper draws shared alpha, beta in F_q^* and gamma, delta in F_q,
    plays the strategy on relabeled inputs x~ = alpha*x + gamma,
    y~ = beta*y + delta, and corrects the outputs:

        a = (f(x~) - delta*alpha*x - gamma*delta) / (alpha*beta)
        b = (g(y~) - beta*gamma*y) / (alpha*beta)

    Each returned pmf is the exact average over the (q-1)^2 q^2 draws.
    """
    f, g = box.strategy
    q = field.q
    total = (q - 1) * (q - 1) * q * q
    out = []
    for x in field.elements():
        for y in field.elements():
            xy = field.mul(x, y)
            counts = [0] * q
            for alpha in field.units():
                ax = field.mul(alpha, x)
                for beta in field.units():
                    inv_ab = field.inv(field.mul(alpha, beta))
                    by = field.mul(beta, y)
                    for gamma in field.elements():
                        xt = field.add(ax, gamma)
                        bg_y = field.mul(gamma, by)
                        for delta in field.elements():
                            yt = field.add(by, delta)
                            a_num = field.sub(f[xt],
                                              field.add(field.mul(delta, ax),
                                                        field.mul(gamma, delta)))
                            b_num = field.sub(g[yt], bg_y)
                            a = field.mul(a_num, inv_ab)
                            b = field.mul(b_num, inv_ab)
                            counts[field.sub(field.add(a, b), xy)] += 1
            out.append([Fraction(c, total) for c in counts])
    return out


def regularize(field: Field, box: StrategyBox) -> RegularBox:
    """Exact regular box equivalent to a deterministic strategy.

    Asserts the wrapper really does produce an input-independent,
    off-zero-uniform error, and that p_win is preserved exactly.
    """
    dists = per_input_error_dists(field, box)
    first = dists[0]
    if any(d != first for d in dists[1:]):
        raise InvariantViolation("wrapped error depends on the input pair")
    off = set(first[1:])
    if len(off) > 1:
        raise InvariantViolation("wrapped error is not uniform off zero")
    value = win_count(field, box.strategy)
    if first[0] != value.p_win:
        raise InvariantViolation("regularization changed the winning probability")
    return RegularBox(field.q, bias_from_p_win(field.q, first[0]))


# ---------------------------------------------------------------------------
# composition and the distributed game
# ---------------------------------------------------------------------------

def convolve(field: Field, d1: ErrorDist, d2: ErrorDist) -> ErrorDist:
    if d1.q != field.q or d2.q != field.q:
        raise InvalidInput("distribution/field size mismatch")
    q = field.q
    probs = [Fraction(0)] * q
    for e1, p1 in enumerate(d1.probs):
        if p1 == 0:
            continue
        for e2, p2 in enumerate(d2.probs):
            probs[field.add(e1, e2)] += p1 * p2
    return ErrorDist(q, tuple(probs))


def compose_m(field: Field, box: RegularBox, m: int) -> ErrorDist:
    """Error of m independent uses summed over F_q (m-fold convolution)."""
    if m < 1:
        raise InvalidInput("m must be >= 1")
    base = box.error_dist()
    acc = base
    for _ in range(m - 1):
        acc = convolve(field, acc, base)
    return acc


def compose_closed_form(q: int, E: Fraction, m: int) -> ErrorDist:
    """p(0) = 1/q + (q-1)E^m/q, p(k != 0) = 1/q - E^m/q.

    One convolution step lands on zero as p0^2 + (q-1) p1^2: the off-zero
    pairings contribute q-1 equal terms (one per nonzero error value, not
    q), which is exactly what keeps the bias multiplicative."""
    return RegularBox(q, Fraction(E) ** m).error_dist()


def distribute(field: Field, box: RegularBox) -> RegularBox:
    """Regular box for the distributed game from two independent uses.

    Alice holds (alpha, gamma), Bob holds (beta, delta); the box is used on
    (alpha, delta) and (gamma, beta), outputs are corrected by alpha*gamma
    and beta*delta, and the players win iff the two errors cancel.  The
    resulting error e1 + e2 is again regular; its bias is extracted from
    the convolution rather than assumed.
    """
    err = box.error_dist()
    conv = convolve(field, err, err)
    if not conv.is_regular():
        raise InvariantViolation("two-use error is not regular")
    return RegularBox(field.q, conv.bias())


# ---------------------------------------------------------------------------
# Monte Carlo sanity layer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    stderr: float
    samples: int


def monte_carlo_win(field: Field, box, game: str = "base",
                    samples: int = 10 ** 5, seed: int = 0) -> MonteCarloResult:
    """Estimate p_win by simulation; unbiased, deterministic per seed."""
    if samples < 1:
        raise InvalidInput("samples must be >= 1")
    if game not in ("base", "dist"):
        raise InvalidInput(f"unknown game {game!r}")
    q = field.q
    rng = np.random.default_rng(seed)
    add = np.array([[field.add(a, b) for b in range(q)] for a in range(q)])
    mul = np.array([[field.mul(a, b) for b in range(q)] for a in range(q)])

    if isinstance(box, RegularBox):
        pmf = np.array([float(p) for p in box.error_dist().probs])
        pmf = pmf / pmf.sum()   # guard float rounding in np.choice
        if game == "base":
            e = rng.choice(q, size=samples, p=pmf)
            success = e == 0
        else:
            e1 = rng.choice(q, size=samples, p=pmf)
            e2 = rng.choice(q, size=samples, p=pmf)
            success = add[e1, e2] == 0
    elif isinstance(box, StrategyBox):
        f = np.array(box.strategy.f)
        g = np.array(box.strategy.g)
        if game == "base":
            x = rng.integers(0, q, size=samples)
            y = rng.integers(0, q, size=samples)
            success = add[f[x], g[y]] == mul[x, y]
        else:
            alpha = rng.integers(0, q, size=samples)
            gamma = rng.integers(0, q, size=samples)
            beta = rng.integers(0, q, size=samples)
            delta = rng.integers(0, q, size=samples)
            a = add[add[f[alpha], f[gamma]], mul[alpha, gamma]]
            b = add[add[g[delta], g[beta]], mul[beta, delta]]
            target = mul[add[alpha, beta], add[gamma, delta]]
            success = add[a, b] == target
    else:
        raise InvalidInput("box must be a RegularBox or StrategyBox")

    est = float(success.mean())
    stderr = float(np.sqrt(est * (1.0 - est) / samples))
    return MonteCarloResult(estimate=est, stderr=stderr, samples=samples)
