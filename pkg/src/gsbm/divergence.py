"""Information metric, divergences, moment generating functions.

The threshold quantity is

    I = lambda * nu_d * r^d * integral_0^r
        (1 - sqrt(f_in f_out) - sqrt((1 - f_in)(1 - f_out))) g(t) dt

with the radial density g(t) = d t^(d-1) / r^d.  Integrals use
composite Gauss-Legendre quadrature per profile piece (the integrands
are smooth inside pieces and only kink at knots); the scalar
minimizations over t in [0, 1] use golden-section search, justified by
convexity of the objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import unit_ball_volume
from .profiles import Profile, evaluate

QUAD_NODES = 16
GOLDEN_TOL = 1e-10
PMF_TOL = 1e-9

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DivergenceReport:
    """Information metric value with its divergence decomposition."""

    I: float
    D_plus: float
    t_star: float
    quad_error: float


@dataclass(frozen=True)
class ZSample:
    """One draw of the genie log-likelihood-ratio surrogate."""

    value: float
    n_plus: int
    n_minus: int


def golden_section(f, a: float, b: float, tol: float = GOLDEN_TOL) -> tuple[float, float]:
    """Minimize a convex scalar function on [a, b] to interval width tol."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


@lru_cache(maxsize=8)
def _gauss_rule(n_nodes: int):
    return leggauss(n_nodes)


def _radial_quadrature(profile: Profile, d: int, phi, n_nodes: int) -> float:
    """Integral of phi(f_in, f_out) against g(t) = d t^(d-1)/r^d over [0, r]."""
    nodes, weights = _gauss_rule(n_nodes)
    knots = profile.knots
    r = profile.r
    total = 0.0
    for i in range(len(knots) - 1):
        a, b = knots[i], knots[i + 1]
        half = (b - a) / 2.0
        x = half * (nodes + 1.0) + a
        fi = profile.f_in.left_values[i] + profile.f_in.slopes[i] * (x - a)
        fo = profile.f_out.left_values[i] + profile.f_out.slopes[i] * (x - a)
        dens = d * x ** (d - 1) / r**d
        total += half * np.sum(weights * phi(fi, fo) * dens)
    return float(total)


def _hellinger_affinity(fi, fo):
    return np.sqrt(fi * fo) + np.sqrt((1.0 - fi) * (1.0 - fo))


def information_metric(profile: Profile, lam: float, d: int) -> DivergenceReport:
    """Threshold quantity I plus its divergence decomposition.

    I = lam * nu_d * r^d * (1 - integral of the Hellinger affinity);
    D_plus and the minimizer come from ch_divergence_profile, and the
    quadrature error estimate compares against doubled node count.
    """
    if lam <= 0.0:
        raise ValueError("intensity lambda must be positive")
    scale = lam * unit_ball_volume(d) * profile.r**d

    def phi(fi, fo):
        return 1.0 - _hellinger_affinity(fi, fo)

    raw = _radial_quadrature(profile, d, phi, QUAD_NODES)
    raw_hi = _radial_quadrature(profile, d, phi, 2 * QUAD_NODES)
    d_plus, t_star = ch_divergence_profile(profile, d)
    return DivergenceReport(
        I=scale * raw,
        D_plus=d_plus,
        t_star=t_star,
        quad_error=abs(scale * (raw - raw_hi)),
    )


def mgf_P(profile: Profile, d: int, t: float) -> float:
    """MGF at t of the log ratio scored against the cross-community law."""
    def phi(fi, fo):
        return fi**t * fo ** (1.0 - t) + (1.0 - fi) ** t * (1.0 - fo) ** (1.0 - t)

    return _radial_quadrature(profile, d, phi, QUAD_NODES)


def mgf_Q(profile: Profile, d: int, t: float) -> float:
    """Companion MGF with the roles of f_in and f_out swapped."""
    def phi(fi, fo):
        return fo**t * fi ** (1.0 - t) + (1.0 - fo) ** t * (1.0 - fi) ** (1.0 - t)

    return _radial_quadrature(profile, d, phi, QUAD_NODES)


def ch_divergence_profile(profile: Profile, d: int) -> tuple[float, float]:
    """Divergence of the edge observations with the radial density weight.

    Bernoulli alphabet, symmetric prior over the two community-pair
    classes; swapping classes maps t to 1 - t, so the objective is the
    symmetrized (mgf_P(t) + mgf_Q(t)) / 2 and the minimizer sits at 1/2.
    """
    def objective(t: float) -> float:
        return 0.5 * (mgf_P(profile, d, t) + mgf_Q(profile, d, t))

    t_star, val = golden_section(objective, 0.0, 1.0)
    return 1.0 - val, t_star


def ch_divergence_discrete(p, q, pi) -> tuple[float, float]:
    """Divergence between two lists of pmfs over a shared finite alphabet.

    1 - inf over t in [0, 1] of sum_i pi_i sum_x p_i(x)^t q_i(x)^(1-t),
    found by golden-section search (each summand is convex in t).
    """
    p = [np.asarray(pk, dtype=np.float64) for pk in p]
    q = [np.asarray(qk, dtype=np.float64) for qk in q]
    pi = np.asarray(pi, dtype=np.float64)
    if not (len(p) == len(q) == len(pi)):
        raise ValueError("p, q, pi must have matching lengths")
    for name, dists in (("p", p), ("q", q)):
        for k, dist in enumerate(dists):
            if abs(dist.sum() - 1.0) > PMF_TOL:
                raise ValueError(f"{name}[{k}] is not normalized")
            if np.any(dist < 0.0):
                raise ValueError(f"{name}[{k}] has negative mass")
    if abs(pi.sum() - 1.0) > PMF_TOL:
        raise ValueError("pi is not a probability vector")

    def objective(t: float) -> float:
        total = 0.0
        for w, pk, qk in zip(pi, p, q):
            total += float(w) * float(np.sum(pk**t * qk ** (1.0 - t)))
        return total

    t_star, val = golden_section(objective, 0.0, 1.0)
    return 1.0 - val, t_star


def rate_function_zero(profile: Profile, d: int) -> float:
    """Large-deviation rate at zero of the per-neighbor score mixture.

    Equals -log mgf_P(1/2): the mixture MGF (mgf_P + mgf_Q)/2 is
    minimized exactly at t = 1/2, where the two coincide.
    """
    return -math.log(mgf_P(profile, d, 0.5))


def _draw_scores(profile: Profile, d: int, count: int, rng, swap: bool) -> np.ndarray:
    """i.i.d. per-neighbor log-ratio scores; swap=True gives the Q law."""
    if count == 0:
        return np.empty(0, dtype=np.float64)
    dist = profile.r * rng.random(count) ** (1.0 / d)
    fi, fo = evaluate(profile, dist)
    bern_p = fi if swap else fo
    hit = rng.random(count) < bern_p
    if swap:
        pos = np.log(fo / fi)
        neg = np.log((1.0 - fo) / (1.0 - fi))
    else:
        pos = np.log(fi / fo)
        neg = np.log((1.0 - fi) / (1.0 - fo))
    return np.where(hit, pos, neg)


def sample_Z(profile: Profile, lam: float, d: int, n: float, rng) -> ZSample:
    """One draw of Z: Poisson-many P-scores plus Poisson-many Q-scores."""
    if n <= 1.0:
        raise ValueError("volume n must exceed 1")
    mu = lam * unit_ball_volume(d) * profile.r**d * math.log(n) / 2.0
    n_plus = int(rng.poisson(mu))
    n_minus = int(rng.poisson(mu))
    value = float(
        _draw_scores(profile, d, n_plus, rng, swap=False).sum()
        + _draw_scores(profile, d, n_minus, rng, swap=True).sum()
    )
    return ZSample(value=value, n_plus=n_plus, n_minus=n_minus)


def sample_Z_many(profile: Profile, lam: float, d: int, n: float, size: int, rng) -> np.ndarray:
    """Vectorized batch of sample_Z values (same law, batched draws)."""
    if n <= 1.0:
        raise ValueError("volume n must exceed 1")
    mu = lam * unit_ball_volume(d) * profile.r**d * math.log(n) / 2.0
    out = np.zeros(size, dtype=np.float64)
    for swap in (False, True):
        counts = rng.poisson(mu, size=size)
        scores = _draw_scores(profile, d, int(counts.sum()), rng, swap=swap)
        owner = np.repeat(np.arange(size), counts)
        out += np.bincount(owner, weights=scores, minlength=size)
    return out
