"""Numerical probes of the bilinear character-sum bound.

For unit vectors u_x, v_y in C^n indexed by F_q and the canonical
additive character chi, the quantity

    S = | sum_{x,y} chi(-xy) <u_x, v_y> |

never exceeds q^(3/2); the Fourier family (standard basis against
normalized character columns) attains it.  Inner products are
conjugate-linear in the first slot throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .field import Field, AdditiveCharacter

NORM_TOL = 1e-10
BOUND_TOL = 1e-9


@dataclass(frozen=True)
class VectorFamily:
    """q unit vectors u_x and q unit vectors v_y as rows of (q, n) arrays."""
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u, v = np.asarray(self.u, dtype=complex), np.asarray(self.v, dtype=complex)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if u.shape != v.shape or u.ndim != 2:
            raise InvalidInput("u and v must both be (q, n) arrays")
        for arr in (u, v):
            norms = np.linalg.norm(arr, axis=1)
            if np.abs(norms - 1.0).max() > NORM_TOL:
                raise InvalidInput("family vectors must be unit norm")

    @property
    def q(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.u.shape[1]


def random_family(q: int, n: int, seed: int) -> VectorFamily:
    """Rows drawn as complex gaussians and normalized; deterministic per seed."""
    rng = np.random.default_rng(seed)
    shape = (2, q, n)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    z /= np.linalg.norm(z, axis=2, keepdims=True)
    return VectorFamily(u=z[0], v=z[1])


def _kernel(field: Field, chi: AdditiveCharacter) -> np.ndarray:
    """K[x, y] = chi(-x*y)."""
    q = field.q
    tab = np.array(chi.table)
    idx = np.array([[field.neg(field.mul(x, y)) for y in range(q)]
                    for x in range(q)])
    return tab[idx]


def character_bilinear_sum(field: Field, fam: VectorFamily,
                           chi: AdditiveCharacter | None = None) -> float:
    """| sum over x, y of chi(-xy) <u_x, v_y> |."""
    if fam.q != field.q:
        raise InvalidInput("family size does not match the field")
    if chi is None:
        chi = AdditiveCharacter(field)
    gram = fam.u.conj() @ fam.v.T            # gram[x, y] = <u_x, v_y>
    return float(abs((_kernel(field, chi) * gram).sum()))


def verify_bound(field: Field, fam: VectorFamily,
                 chi: AdditiveCharacter | None = None) -> bool:
    return character_bilinear_sum(field, fam, chi) <= field.q ** 1.5 + BOUND_TOL


def cauchy_schwarz_chain(field: Field, fam: VectorFamily,
                         chi: AdditiveCharacter | None = None
                         ) -> tuple[float, float, float]:
    """(S, sqrt(q) * sum_i ||u(., i)|| ||v(., i)||, q^(3/2)).

    The middle term applies the scalar character-sum bound per coordinate;
    a final Cauchy-Schwarz over coordinates gives the endpoint.  Both
    inequalities hold on every family, so the triple is nondecreasing."""
    s = character_bilinear_sum(field, fam, chi)
    col_u = np.linalg.norm(fam.u, axis=0)
    col_v = np.linalg.norm(fam.v, axis=0)
    mid = float(np.sqrt(field.q) * (col_u * col_v).sum())
    return s, mid, field.q ** 1.5


def fourier_matrix(field: Field, chi: AdditiveCharacter | None = None) -> np.ndarray:
    """H[x, y] = chi(xy)/sqrt(q); unitary for every prime power q."""
    if chi is None:
        chi = AdditiveCharacter(field)
    q = field.q
    tab = np.array(chi.table)
    idx = np.array([[field.mul(x, y) for y in range(q)] for x in range(q)])
    return tab[idx] / np.sqrt(q)


def tight_family(field: Field, chi: AdditiveCharacter | None = None) -> VectorFamily:
    """Standard basis against character columns: every term chi(-xy)<u_x,v_y>
    equals 1/sqrt(q), so the sum is exactly q^(3/2)."""
    if chi is None:
        chi = AdditiveCharacter(field)
    q = field.q
    u = np.eye(q, dtype=complex)
    v = fourier_matrix(field, chi)           # v[y, i] = chi(iy)/sqrt(q)
    return VectorFamily(u=u, v=v)


@dataclass(frozen=True)
class MaximizeResult:
    family: VectorFamily
    value: float
    history: tuple[float, ...]   # objective after each half-step


def maximize_sum(field: Field, n: int, seed: int, rounds: int = 50,
                 chi: AdditiveCharacter | None = None) -> MaximizeResult:
    """Alternating maximization of the bilinear sum over unit families.

    Half-steps set u_x parallel to w_x = sum_y chi(-xy) v_y and then v_y
    parallel to t_y = sum_x chi(xy) u_x; each half-step maximizes the sum
    with the other side fixed, so the objective never decreases.  Rows
    with a zero update keep their previous vector."""
    if rounds < 1:
        raise InvalidInput("rounds must be >= 1")
    if chi is None:
        chi = AdditiveCharacter(field)
    K = _kernel(field, chi)
    fam = random_family(field.q, n, seed)
    u, v = fam.u.copy(), fam.v.copy()
    history = []
    for _ in range(rounds):
        w = K @ v
        u = _renorm_into(w, u)
        history.append(float(np.linalg.norm(w, axis=1).sum()))
        t = K.conj().T @ u
        v = _renorm_into(t, v)
        history.append(float(np.linalg.norm(t, axis=1).sum()))
        if len(history) >= 4 and history[-1] - history[-3] < 1e-12:
            break
    best = VectorFamily(u=u, v=v)
    return MaximizeResult(family=best,
                          value=character_bilinear_sum(field, best, chi),
                          history=tuple(history))


def _renorm_into(target: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(target, axis=1, keepdims=True)
    out = fallback.copy()
    nz = norms[:, 0] > 0
    out[nz] = target[nz] / norms[nz]
    return out


def implied_bias_ceiling(q: int) -> float:
    """The bound forces every box bias to satisfy E <= q^(-1/2)."""
    if q < 2:
        raise InvalidInput("q must be at least 2")
    return q ** -0.5
