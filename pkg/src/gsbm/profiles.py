"""Edge-probability profiles.

A profile is the pair (f_in, f_out) of distance-dependent edge
probabilities on [0, r], restricted here to piecewise constant/linear
pieces so that intersections, sublevel-set measures, and the
near-intersection span are exactly computable.  Pieces are left-closed
and right-open; f(r) takes the last piece's value; both functions are 0
beyond r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INTERSECTION_TOL = 1e-12

# default_epsilon: 16 log-spaced candidates in [max|diff|/256, max|diff|/2],
# accepted while the near-equal set has measure below r/4.
_EPS_GRID_SIZE = 16
_EPS_GRID_LO_DIV = 256.0
_EPS_GRID_HI_DIV = 2.0
_EPS_MEASURE_FRACTION = 0.25


class ProfileError(ValueError):
    """Raised when a profile violates the model's regularity requirements."""


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Piecewise-linear function on [knots[0], knots[-1]], zero beyond.

    Piece i covers [knots[i], knots[i+1]) with value
    left_values[i] + slopes[i] * (t - knots[i]); the final knot is
    closed and evaluates through the last piece.
    """

    knots: np.ndarray
    left_values: np.ndarray
    slopes: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        idx = np.clip(
            np.searchsorted(self.knots, t, side="right") - 1,
            0,
            len(self.left_values) - 1,
        )
        val = self.left_values[idx] + self.slopes[idx] * (t - self.knots[idx])
        out = np.where(t <= self.knots[-1], val, 0.0)
        return float(out[0]) if scalar else out

    @property
    def piece_count(self) -> int:
        return len(self.left_values)

    def value_at_knots(self) -> np.ndarray:
        """Values at every knot, the final knot included (closed end)."""
        right = self.left_values + self.slopes * np.diff(self.knots)
        return np.concatenate([self.left_values, right[-1:]])


@dataclass(frozen=True, eq=False)
class Profile:
    """Same/cross-community edge probabilities with regularity metadata.

    xi bounds both functions strictly inside (xi, 1 - xi) on [0, r];
    intersections are the zeros of f_in - f_out on [0, r] (tangential
    touches included), which the model requires to be a finite set.
    """

    r: float
    f_in: PiecewiseLinear
    f_out: PiecewiseLinear
    xi: float
    intersections: tuple[float, ...]

    @property
    def knots(self) -> np.ndarray:
        """Shared piece boundaries of f_in and f_out."""
        return self.f_in.knots


def _validate_knot_list(knots, name: str) -> tuple[np.ndarray, np.ndarray]:
    ts = np.asarray([t for t, _ in knots], dtype=np.float64)
    vs = np.asarray([v for _, v in knots], dtype=np.float64)
    if len(ts) < 2:
        raise ProfileError(f"{name}: need at least two knots")
    if ts[0] != 0.0:
        raise ProfileError(f"{name}: first knot abscissa must be 0")
    if np.any(np.diff(ts) <= 0):
        raise ProfileError(f"{name}: knot abscissas must be strictly increasing")
    if np.any(vs <= 0.0) or np.any(vs >= 1.0):
        raise ProfileError(
            f"{name}: edge probabilities must lie strictly inside (0, 1)"
        )
    return ts, vs


def _interp_pieces(merged: np.ndarray, ts: np.ndarray, vs: np.ndarray) -> PiecewiseLinear:
    vals = np.interp(merged, ts, vs)
    widths = np.diff(merged)
    slopes = np.diff(vals) / widths
    # constant pieces: keep slopes exactly 0 to avoid -0.0 noise
    slopes[vals[1:] == vals[:-1]] = 0.0
    return PiecewiseLinear(knots=merged, left_values=vals[:-1], slopes=slopes)


def _solve_intersections(f_in: PiecewiseLinear, f_out: PiecewiseLinear) -> tuple[float, ...]:
    """Zeros of f_in - f_out piece by piece (linear vs linear, exact)."""
    knots = f_in.knots
    g_lo = f_in.left_values - f_out.left_values
    g_m = f_in.slopes - f_out.slopes
    roots: list[float] = []
    n_pieces = len(g_lo)
    for i in range(n_pieces):
        a, b = knots[i], knots[i + 1]
        width = b - a
        g_a = g_lo[i]
        g_b = g_lo[i] + g_m[i] * width
        if abs(g_a) <= INTERSECTION_TOL and abs(g_b) <= INTERSECTION_TOL:
            raise ProfileError(
                "degenerate profile: f_in = f_out on an interval of positive length"
            )
        if g_m[i] == 0.0:
            continue
        s = -g_a / g_m[i]
        if -INTERSECTION_TOL <= s <= width + INTERSECTION_TOL:
            t = min(max(a + s, a), b)
            # zeros at shared knots are reported once (by the piece
            # whose left end they touch); the final knot r is included
            if t < b or i == n_pieces - 1:
                roots.append(float(t))
    roots.sort()
    deduped: list[float] = []
    for t in roots:
        if not deduped or t - deduped[-1] > INTERSECTION_TOL:
            deduped.append(t)
    return tuple(deduped)


def _build_profile(ts_in, vs_in, ts_out, vs_out, r: float) -> Profile:
    merged = np.unique(np.concatenate([ts_in, ts_out]))
    f_in = _interp_pieces(merged, ts_in, vs_in)
    f_out = _interp_pieces(merged, ts_out, vs_out)
    all_vals = np.concatenate([f_in.value_at_knots(), f_out.value_at_knots()])
    xi = float(np.min(np.minimum(all_vals, 1.0 - all_vals)) / 2.0)
    intersections = _solve_intersections(f_in, f_out)
    return Profile(r=float(r), f_in=f_in, f_out=f_out, xi=xi, intersections=intersections)


def make_step_profile(a: float, b: float, r: float) -> Profile:
    """Constant f_in = a, f_out = b on [0, r]."""
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise ProfileError("step levels must lie strictly inside (0, 1)")
    if r <= 0.0:
        raise ProfileError("support cutoff r must be positive")
    if a == b:
        raise ProfileError("degenerate profile: f_in = f_out everywhere")
    knots = np.array([0.0, float(r)])
    f_in = PiecewiseLinear(knots, np.array([float(a)]), np.array([0.0]))
    f_out = PiecewiseLinear(knots, np.array([float(b)]), np.array([0.0]))
    xi = min(a, b, 1.0 - a, 1.0 - b) / 2.0
    return Profile(r=float(r), f_in=f_in, f_out=f_out, xi=xi, intersections=())


def make_piecewise_linear_profile(knots_in, knots_out, r: float) -> Profile:
    """Piecewise-linear interpolants through (t, value) knot lists.

    Both lists must start at abscissa 0 and end at r with strictly
    increasing abscissas and values strictly inside (0, 1).
    """
    if r <= 0.0:
        raise ProfileError("support cutoff r must be positive")
    ts_in, vs_in = _validate_knot_list(knots_in, "knots_in")
    ts_out, vs_out = _validate_knot_list(knots_out, "knots_out")
    if ts_in[-1] != r or ts_out[-1] != r:
        raise ProfileError("last knot abscissa must equal r")
    return _build_profile(ts_in, vs_in, ts_out, vs_out, r)


def evaluate(profile: Profile, t):
    """(f_in(t), f_out(t)); both 0 for t > r. Accepts scalars or arrays."""
    return profile.f_in(t), profile.f_out(t)


def evaluate_scaled(profile: Profile, distance, n: float, d: int):
    """Profile at distance/(log n)^(1/d), the graph-scale evaluation."""
    if n <= 1.0:
        raise ProfileError("invalid scale: need n > 1")
    scale = math.log(n) ** (1.0 / d)
    distance = np.asarray(distance, dtype=np.float64)
    return evaluate(profile, distance / scale)


def distinguishes(profile: Profile, t, eps: float):
    """True where |f_in(t) - f_out(t)| > eps (t in unscaled units)."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    fi, fo = evaluate(profile, t)
    return np.abs(fi - fo) > eps


def _diff_function(profile: Profile) -> PiecewiseLinear:
    return PiecewiseLinear(
        knots=profile.f_in.knots,
        left_values=profile.f_in.left_values - profile.f_out.left_values,
        slopes=profile.f_in.slopes - profile.f_out.slopes,
    )


def _sublevel_intervals(profile: Profile, eps: float) -> list[tuple[float, float]]:
    """Closed intervals forming {t in [0, r] : |f_in(t) - f_out(t)| <= eps}."""
    g = _diff_function(profile)
    intervals: list[tuple[float, float]] = []
    for i in range(g.piece_count):
        a, b = g.knots[i], g.knots[i + 1]
        lo_val = g.left_values[i]
        m = g.slopes[i]
        if m == 0.0:
            if abs(lo_val) <= eps:
                intervals.append((a, b))
            continue
        # solve -eps <= lo_val + m * (t - a) <= eps on [a, b]
        t1 = a + (-eps - lo_val) / m
        t2 = a + (eps - lo_val) / m
        lo, hi = min(t1, t2), max(t1, t2)
        lo, hi = max(lo, a), min(hi, b)
        if lo <= hi:
            intervals.append((lo, hi))
    if not intervals:
        return []
    intervals.sort()
    merged = [intervals[0]]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def sublevel_measure(profile: Profile, eps: float) -> float:
    """Lebesgue measure of {t in [0, r] : |f_in(t) - f_out(t)| <= eps}."""
    return sum(hi - lo for lo, hi in _sublevel_intervals(profile, eps))


def gamma(profile: Profile, eps: float) -> float:
    """Largest distance from the near-equal set to the intersection set.

    Supremum of dist(t, intersections) over t in [0, r] with
    |f_in(t) - f_out(t)| <= eps; 0 when that set is empty.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    intervals = _sublevel_intervals(profile, eps)
    if not intervals:
        return 0.0
    pts = np.asarray(profile.intersections)
    if len(pts) == 0:
        raise ProfileError("gamma undefined: no intersection points")
    mids = (pts[:-1] + pts[1:]) / 2.0

    def dist(t: float) -> float:
        return float(np.min(np.abs(pts - t)))

    best = 0.0
    for lo, hi in intervals:
        # dist(., pts) is piecewise linear; maxima on [lo, hi] occur at
        # the endpoints or at midpoints between consecutive intersections
        cand = [lo, hi] + [m for m in mids if lo < m < hi]
        best = max(best, max(dist(c) for c in cand))
    return best


def max_abs_diff(profile: Profile) -> float:
    """max over [0, r] of |f_in - f_out| (attained at a knot)."""
    g = _diff_function(profile)
    return float(np.max(np.abs(g.value_at_knots())))


def default_epsilon(profile: Profile) -> float:
    """Distinguishing threshold used when no override is given.

    Largest candidate on a fixed 16-point log grid for which the
    near-equal set {|f_in - f_out| <= eps} has measure below r/4, so at
    least three quarters of the radial support separates the two edge
    probabilities.  Falls back to the smallest grid value.
    """
    top = max_abs_diff(profile)
    hi = top / _EPS_GRID_HI_DIV
    lo = top / _EPS_GRID_LO_DIV
    grid = np.geomspace(lo, hi, _EPS_GRID_SIZE)
    budget = profile.r * _EPS_MEASURE_FRACTION
    for eps in grid[::-1]:
        if sublevel_measure(profile, float(eps)) < budget:
            return float(eps)
    return float(grid[0])
