"""Position estimation from anchor distances.

Two solvers share the same geometry: a closed-form three-anchor solution
working in a canonical frame (first anchor at the origin, second on the
+x axis), and a damped Gauss-Newton least-squares refinement that accepts
any number of anchors at or above three. Uncertainty composition follows
the root-sum-of-squares rule for independent error sources.

:class:`Multilaterator` wraps the iterative solver in a scikit-learn
style estimator: ``fit`` takes the anchor layout, ``predict`` maps rows
of per-anchor distances to planar coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateGeometryError, DomainError, InsufficientDataError
from .validation import as_point, as_points, check_non_negative

# Triangle area at or below this is treated as collinear.
COLLINEARITY_AREA_TOL = 1e-9

_METHOD_CLOSED_FORM = "closed_form"
_METHOD_LEAST_SQUARES = "least_squares"


@dataclass(frozen=True)
class AnchorSet:
    """Fixed reference nodes with known planar coordinates."""

    ids: tuple
    positions: np.ndarray

    def __post_init__(self):
        positions = as_points(self.positions, "positions", min_rows=3)
        if len(self.ids) != positions.shape[0]:
            raise DomainError(
                f"{len(self.ids)} ids for {positions.shape[0]} positions"
            )
        if len(set(self.ids)) != len(self.ids):
            raise DomainError("anchor ids must be unique")
        if _max_triangle_area(positions) <= COLLINEARITY_AREA_TOL:
            raise DegenerateGeometryError(
                "anchor set is collinear; planar fixes are ambiguous"
            )
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "positions", positions)

    @classmethod
    def from_positions(cls, positions) -> "AnchorSet":
        positions = as_points(positions, "positions", min_rows=3)
        return cls(ids=tuple(range(positions.shape[0])), positions=positions)

    def position_of(self, anchor_id) -> np.ndarray:
        try:
            idx = self.ids.index(anchor_id)
        except ValueError:
            raise DomainError(f"unknown anchor id {anchor_id!r}") from None
        return self.positions[idx]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class PositionFix:
    """One solver output: coordinates plus quality figures."""

    position: tuple
    sigma_pos_m: float = 0.0
    residual_rms_m: float = 0.0
    n_ranges_used: int = 0
    method: str = _METHOD_LEAST_SQUARES
    t: float = 0.0
    converged: bool = True

    def __post_init__(self):
        check_non_negative(self.sigma_pos_m, "sigma_pos_m")
        check_non_negative(self.residual_rms_m, "residual_rms_m")
        object.__setattr__(
            self, "position", (float(self.position[0]), float(self.position[1]))
        )

    @property
    def x_m(self) -> float:
        return self.position[0]

    @property
    def y_m(self) -> float:
        return self.position[1]


def _max_triangle_area(points: np.ndarray) -> float:
    best = 0.0
    n = points.shape[0]
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            edge = points[j] - points[i]
            for k in range(j + 1, n):
                other = points[k] - points[i]
                area = 0.5 * abs(edge[0] * other[1] - edge[1] * other[0])
                if area > best:
                    best = area
    return best


def triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    ab = b - a
    ac = c - a
    return 0.5 * abs(ab[0] * ac[1] - ab[1] * ac[0])


def trilaterate(
    anchor1,
    anchor2,
    anchor3,
    d1: float,
    d2: float,
    d3: float,
    variant: str = "consistent",
    full_output: bool = False,
):
    """Closed-form planar position from three anchor distances.

    Anchors are mapped into a canonical frame (anchor1 at the origin,
    anchor2 on +x) where, with anchor3 at (x3, y3),

        x = (d1^2 - d2^2 + d12^2) / (2 d12)
        y = (d1^2 - d3^2 + x3^2 + y3^2 - 2 x3 x) / (2 y3)

    and the result is mapped back. With ``variant="consistent"`` (the
    default) the solution satisfies all three circle equations whenever
    they share a point; circles with no common point yield the nearest
    radical-line intersection, reported as approximate via
    ``full_output``. ``variant="subtract_x2"`` swaps in an alternative y
    expression, y = (d1^2 - d3^2 + d13^2 - x^2) / (2 d13), kept for
    comparison output only; it disagrees with the circle geometry away
    from x = 0.

    Reference case: anchors (0,0), (2,0), (0,2) with all three distances
    sqrt(2) give (1, 1) under the default and (1, 0.75) under
    ``subtract_x2``.
    """
    a1 = as_point(anchor1, "anchor1")
    a2 = as_point(anchor2, "anchor2")
    a3 = as_point(anchor3, "anchor3")
    for name, d in (("d1", d1), ("d2", d2), ("d3", d3)):
        check_non_negative(d, name)
    if variant not in ("consistent", "subtract_x2"):
        raise DomainError(f"unknown variant {variant!r}")

    if triangle_area(a1, a2, a3) <= COLLINEARITY_AREA_TOL:
        raise DegenerateGeometryError("anchors are collinear (triangle area <= 1e-9)")

    # Canonical frame: a1 at origin, a2 on the +x axis.
    base = a2 - a1
    d12 = math.hypot(base[0], base[1])
    ex = base / d12
    ey = np.array([-ex[1], ex[0]])
    rel3 = a3 - a1
    x3 = float(rel3 @ ex)
    y3 = float(rel3 @ ey)

    x = (d1 * d1 - d2 * d2 + d12 * d12) / (2.0 * d12)
    if variant == "consistent":
        y = (d1 * d1 - d3 * d3 + x3 * x3 + y3 * y3 - 2.0 * x3 * x) / (2.0 * y3)
    else:
        d13 = math.hypot(rel3[0], rel3[1])
        y = (d1 * d1 - d3 * d3 + d13 * d13 - x * x) / (2.0 * d13)

    point = a1 + x * ex + y * ey
    if not full_output:
        return point

    # The solve is exact only when the first circle is also satisfied.
    circle1_gap = abs(x * x + y * y - d1 * d1)
    scale = max(d1 * d1, d12 * d12, 1e-12)
    approximate = circle1_gap > 1e-9 * scale
    return point, {"approximate": approximate, "circle1_gap": circle1_gap}


def _solve_refine(
    positions: np.ndarray,
    dists: np.ndarray,
    start: np.ndarray,
    step_tol_m: float,
    max_iter: int,
    damping: float,
):
    """Damped Gauss-Newton descent on sum((|p - a_i| - d_i)^2)."""

    def cost_at(p):
        norms = np.linalg.norm(p - positions, axis=1)
        r = norms - dists
        return float(r @ r)

    p = start.astype(float).copy()
    best_p = p.copy()
    best_cost = cost_at(p)
    converged = False
    for _ in range(max_iter):
        diff = p - positions
        norms = np.linalg.norm(diff, axis=1)
        norms = np.maximum(norms, 1e-12)
        r = norms - dists
        jac = diff / norms[:, None]
        jtj = jac.T @ jac
        jtr = jac.T @ r
        lam = damping * max(float(np.trace(jtj)), 1.0)
        try:
            step = np.linalg.solve(jtj + lam * np.eye(2), -jtr)
        except np.linalg.LinAlgError:
            break
        step_norm = float(np.linalg.norm(step))
        if step_norm < step_tol_m:
            converged = True
            break
        cost_here = float(r @ r)
        alpha = 1.0
        accepted = False
        for _ in range(20):
            cand = p + alpha * step
            cand_cost = cost_at(cand)
            if cand_cost < cost_here:
                p = cand
                if cand_cost < best_cost:
                    best_cost = cand_cost
                    best_p = p.copy()
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # No descent direction left at this scale; treat as converged
            # when the full step is already tiny.
            converged = step_norm < 10.0 * step_tol_m
            break
        if alpha * step_norm < step_tol_m:
            converged = True
            break
    return best_p, best_cost, converged


def multilaterate_ls(
    anchors: AnchorSet,
    ranges: Sequence,
    initial_guess=None,
    step_tol_m: float = 1e-10,
    max_iter: int = 100,
    damping: float = 1e-12,
) -> PositionFix:
    """Least-squares planar fix from (anchor_id, distance_m) pairs.

    Starts from ``initial_guess`` (default: centroid of the participating
    anchors) and, when the first descent stalls above an exact-fit
    residual, retries from the closed-form three-anchor solution and a
    few deterministic anchor-side starts, which guards against the
    mirror-image local minimum of three-anchor geometries.
    Non-convergence returns the best iterate with ``converged=False``
    rather than raising.
    """
    pairs = list(ranges)
    if len(pairs) < 3:
        raise InsufficientDataError(
            f"need at least 3 ranges for a planar fix, got {len(pairs)}"
        )
    positions = np.array([anchors.position_of(aid) for aid, _ in pairs], dtype=float)
    dists = np.array([d for _, d in pairs], dtype=float)
    if np.any(dists < 0.0) or not np.all(np.isfinite(dists)):
        raise DomainError("distances must be non-negative and finite")
    if len({aid for aid, _ in pairs}) < 3:
        raise InsufficientDataError("need ranges to at least 3 distinct anchors")

    n = len(pairs)
    centroid = positions.mean(axis=0)
    if initial_guess is None:
        first = centroid
    else:
        first = as_point(initial_guess, "initial_guess")
    p, cost, converged = _solve_refine(
        positions, dists, first, step_tol_m, max_iter, damping
    )
    best = (p, cost, converged)

    # Three-anchor geometries keep a mirror-image local minimum; retry from
    # the closed-form intersection (when it exists) and from each anchor
    # (nudged off it, where the gradient degenerates) whenever the first
    # descent stalled or an exact fit was not reached.
    exact_fit = n * (1e-9) ** 2
    if not converged or (n == 3 and cost > exact_fit):
        starts = []
        if n == 3:
            try:
                starts.append(
                    np.asarray(
                        trilaterate(
                            positions[0],
                            positions[1],
                            positions[2],
                            float(dists[0]),
                            float(dists[1]),
                            float(dists[2]),
                        ),
                        dtype=float,
                    )
                )
            except DegenerateGeometryError:
                pass
        starts.extend(0.9 * positions + 0.1 * centroid)
        for start in starts:
            p, cost, converged = _solve_refine(
                positions, dists, start, step_tol_m, max_iter, damping
            )
            if cost < best[1] or (converged and not best[2] and cost <= best[1]):
                best = (p, cost, converged)
            if best[1] <= exact_fit:
                break
    p, cost, converged = best
    return PositionFix(
        position=(float(p[0]), float(p[1])),
        sigma_pos_m=0.0,
        residual_rms_m=math.sqrt(cost / n),
        n_ranges_used=n,
        method=_METHOD_LEAST_SQUARES,
        converged=converged,
    )


def combine_uncertainty(sigma_tof_m: float, sigma_sync_m: float) -> float:
    """Root-sum-of-squares of two independent error contributions, meters."""
    check_non_negative(sigma_tof_m, "sigma_tof_m")
    check_non_negative(sigma_sync_m, "sigma_sync_m")
    return math.hypot(sigma_tof_m, sigma_sync_m)


class Multilaterator(BaseEstimator):
    """Planar position estimator over a fixed anchor layout.

    ``fit`` takes the anchor coordinates as an (n_anchors, 2) array;
    ``predict`` maps an (n_samples, n_anchors) matrix of measured
    distances to (n_samples, 2) coordinates. NaN entries mark missing
    ranges; each row must keep at least three usable ones.

    >>> anchors = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]
    >>> est = Multilaterator().fit(anchors)
    >>> est.predict([[2.0**0.5, 2.0**0.5, 2.0**0.5]]).round(6)
    array([[1., 1.]])
    """

    def __init__(
        self,
        step_tol_m: float = 1e-10,
        max_iter: int = 100,
        damping: float = 1e-12,
    ):
        self.step_tol_m = step_tol_m
        self.max_iter = max_iter
        self.damping = damping

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise DomainError(
                f"anchor coordinates must have shape (n_anchors, 2), got {X.shape}"
            )
        self.anchor_set_ = AnchorSet.from_positions(X)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, D) -> np.ndarray:
        check_is_fitted(self, "anchor_set_")
        D = check_array(D, dtype=float, ensure_all_finite="allow-nan")
        n_anchors = len(self.anchor_set_)
        if D.shape[1] != n_anchors:
            raise DomainError(
                f"distance rows must have {n_anchors} columns, got {D.shape[1]}"
            )
        out = np.empty((D.shape[0], 2), dtype=float)
        for i, row in enumerate(D):
            usable = np.flatnonzero(np.isfinite(row))
            if usable.size < 3:
                raise InsufficientDataError(
                    f"row {i} keeps {usable.size} usable ranges; need 3"
                )
            fix = self.multilaterate(
                [(int(j), float(row[j])) for j in usable]
            )
            out[i] = fix.position
        return out

    def multilaterate(self, ranges: Sequence, initial_guess=None) -> PositionFix:
        """Full fix (with residuals) for one list of (anchor_id, distance)."""
        check_is_fitted(self, "anchor_set_")
        return multilaterate_ls(
            self.anchor_set_,
            ranges,
            initial_guess=initial_guess,
            step_tol_m=self.step_tol_m,
            max_iter=self.max_iter,
            damping=self.damping,
        )
