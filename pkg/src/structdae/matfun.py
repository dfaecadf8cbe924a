"""Time-dependent matrices on a compact interval.

Three concrete kinds cover everything the toolkit needs:

  * ``ConstantMatrixFunction``    -- a fixed matrix, zero derivative;
  * ``PolynomialMatrixFunction``  -- per-entry polynomials in t, analytic
    derivative, closed under sums/products/transposition;
  * ``SampledMatrixFunction``     -- values on a grid, piecewise linear
    (order 1) or cubic interpolation (order 3, not-a-knot end rule).
    Optionally carries derivative samples; the interpolant is then the
    piecewise cubic Hermite matching both, which keeps value/derivative
    pairs exactly consistent at the nodes.

All evaluation is deterministic and side-effect free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .errors import ConstructionError, DimensionError, DomainError

def _as_matrix(value, name="matrix"):
    a = np.array(value, dtype=float)
    if a.ndim != 2:
        raise ConstructionError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ConstructionError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing points spanning a compact interval [t0, tf]."""

    t0: float
    tf: float
    points: np.ndarray = field(repr=False)

    def __init__(self, points):
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if pts.size < 1 or not np.all(np.isfinite(pts)):
            raise ConstructionError("grid needs at least one finite point")
        if np.any(np.diff(pts) <= 0):
            raise ConstructionError("grid points must be strictly increasing")
        if pts.size < 2:
            raise ConstructionError("grid needs t0 < tf, got a single point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t0", float(pts[0]))
        object.__setattr__(self, "tf", float(pts[-1]))

    @classmethod
    def uniform(cls, t0, tf, n):
        if n < 2:
            raise ConstructionError("uniform grid needs n >= 2")
        if not tf > t0:
            raise ConstructionError("grid needs t0 < tf")
        return cls(np.linspace(t0, tf, int(n)))

    @property
    def n(self):
        return int(self.points.size)

    @property
    def span(self):
        return self.tf - self.t0

    def refine(self):
        """Grid with every interval halved (keeps original points)."""
        mids = 0.5 * (self.points[:-1] + self.points[1:])
        return TimeGrid(np.sort(np.concatenate([self.points, mids])))

    def contains(self, t, slack=None):
        if slack is None:
            slack = 1e-12 * max(1.0, abs(self.t0), abs(self.tf))
        return self.t0 - slack <= t <= self.tf + slack

    def within(self, other, slack=None):
        if slack is None:
            slack = 1e-12 * max(1.0, abs(other.t0), abs(other.tf))
        return other.t0 - slack <= self.t0 and self.tf <= other.tf + slack

    def __eq__(self, other):
        return (
            isinstance(other, TimeGrid)
            and self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self):
        return hash((self.t0, self.tf, self.n))


class MatrixFunction:
    """Common interface of the three kinds."""

    rows: int
    cols: int

    @property
    def shape(self):
        return (self.rows, self.cols)

    def eval(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def eval_on(self, grid):
        """Values at all grid points, shape (len(grid), rows, cols)."""
        return np.stack([self.eval(t) for t in grid.points])

    def derivative_on(self, grid):
        return np.stack([self.derivative(t) for t in grid.points])

    def _check_shape_match(self, other):
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")


class ConstantMatrixFunction(MatrixFunction):
    def __init__(self, value):
        self.value = _as_matrix(value, "constant matrix")
        self.rows, self.cols = self.value.shape

    def eval(self, t):
        return self.value.copy()

    def derivative(self, t):
        return np.zeros_like(self.value)

    def eval_on(self, grid):
        return np.broadcast_to(self.value, (grid.n, self.rows, self.cols)).copy()

    def derivative_on(self, grid):
        return np.zeros((grid.n, self.rows, self.cols))


class PolynomialMatrixFunction(MatrixFunction):
    """Matrix polynomial sum_k coeffs[k] * t**k (lowest degree first)."""

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[None, :, :]
        if c.ndim != 3:
            raise ConstructionError("polynomial coefficients must be (deg+1, rows, cols)")
        if not np.all(np.isfinite(c)):
            raise ConstructionError("polynomial coefficients must be finite")
        # trim trailing zero-degree blocks but keep at least the constant term
        deg = c.shape[0] - 1
        while deg > 0 and not np.any(c[deg]):
            deg -= 1
        self.coeffs = c[: deg + 1]
        self.rows, self.cols = c.shape[1], c.shape[2]

    @classmethod
    def from_entries(cls, entries):
        """Build from nested per-entry coefficient lists, lowest degree first.

        An empty coefficient list denotes the zero entry.
        """
        rows = len(entries)
        cols = len(entries[0])
        deg = max(1, max(max(len(e) for e in row) for row in entries)) - 1
        c = np.zeros((deg + 1, rows, cols))
        for i, row in enumerate(entries):
            if len(row) != cols:
                raise ConstructionError("ragged polynomial entry table")
            for j, entry in enumerate(row):
                for k, ck in enumerate(entry):
                    c[k, i, j] = ck
        return cls(c)

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    def eval(self, t):
        out = self.coeffs[-1].copy()
        for k in range(self.coeffs.shape[0] - 2, -1, -1):
            out = out * t + self.coeffs[k]
        return out

    def derivative(self, t):
        return self.derivative_function().eval(t)

    def derivative_function(self):
        if self.degree == 0:
            return PolynomialMatrixFunction(np.zeros((1, self.rows, self.cols)))
        dc = self.coeffs[1:] * np.arange(1, self.degree + 1)[:, None, None]
        return PolynomialMatrixFunction(dc)


class SampledMatrixFunction(MatrixFunction):
    def __init__(self, grid, values, order=3, deriv_values=None):
        if order not in (1, 3):
            raise ConstructionError("interpolation order must be 1 or 3")
        vals = np.array(values, dtype=float)
        if vals.ndim == 2:
            vals = vals[:, :, None]
        if vals.ndim != 3 or vals.shape[0] != grid.n:
            raise ConstructionError(
                f"samples must be (len(grid), rows, cols); got {vals.shape} for {grid.n} points"
            )
        if not np.all(np.isfinite(vals)):
            raise ConstructionError("samples must be finite")
        self.grid = grid
        self.values = vals
        self.order = order
        self.rows, self.cols = vals.shape[1], vals.shape[2]
        if deriv_values is not None:
            if order != 3:
                raise ConstructionError("derivative samples require order 3")
            dv = np.array(deriv_values, dtype=float)
            if dv.shape != vals.shape:
                raise ConstructionError("derivative samples must match value shape")
            if not np.all(np.isfinite(dv)):
                raise ConstructionError("derivative samples must be finite")
            self.deriv_values = dv
        else:
            self.deriv_values = None
        self._spline = None
        self._dspline = None

    def _check_domain(self, t):
        if not self.grid.contains(t):
            raise DomainError(
                f"t={t} outside sampled interval [{self.grid.t0}, {self.grid.tf}]"
            )

    def _build(self):
        if self._spline is None:
            x = self.grid.points
            if self.deriv_values is not None:
                self._spline = CubicHermiteSpline(x, self.values, self.deriv_values, axis=0)
            else:
                self._spline = CubicSpline(x, self.values, axis=0)
            self._dspline = self._spline.derivative()
        return self._spline, self._dspline

    def _segment(self, t):
        x = self.grid.points
        k = int(np.searchsorted(x, t, side="right") - 1)
        return min(max(k, 0), x.size - 2)

    def eval(self, t):
        self._check_domain(t)
        if self.order == 1:
            x = self.grid.points
            k = self._segment(t)
            w = (t - x[k]) / (x[k + 1] - x[k])
            return (1.0 - w) * self.values[k] + w * self.values[k + 1]
        spline, _ = self._build()
        return np.asarray(spline(t), dtype=float)

    def derivative(self, t):
        self._check_domain(t)
        if self.order == 1:
            x = self.grid.points
            # right-hand slope at the nodes, except tf which takes the left one
            if t >= x[-1]:
                k = x.size - 2
            else:
                k = self._segment(t)
            return (self.values[k + 1] - self.values[k]) / (x[k + 1] - x[k])
        if self.deriv_values is not None:
            hit = np.nonzero(np.isclose(self.grid.points, t, rtol=0.0, atol=1e-14))[0]
            if hit.size:
                return self.deriv_values[hit[0]].copy()
        _, dspline = self._build()
        return np.asarray(dspline(t), dtype=float)

    def eval_on(self, grid):
        if grid == self.grid:
            return self.values.copy()
        return super().eval_on(grid)

    def derivative_on(self, grid):
        if self.deriv_values is not None and grid == self.grid:
            return self.deriv_values.copy()
        return super().derivative_on(grid)


def constant(value):
    return ConstantMatrixFunction(value)


def poly(coeffs):
    return PolynomialMatrixFunction(coeffs)


def zero(rows, cols):
    return ConstantMatrixFunction(np.zeros((rows, cols)))


def identity(n):
    return ConstantMatrixFunction(np.eye(n))


def sample(fun, grid, order=3, with_derivatives=False):
    """Resample ``fun`` on ``grid``; exact at the grid points by construction."""
    if isinstance(fun, SampledMatrixFunction) and not grid.within(fun.grid):
        raise DomainError("sampling grid extends beyond the source interval")
    values = fun.eval_on(grid)
    deriv = fun.derivative_on(grid) if (with_derivatives and order == 3) else None
    return SampledMatrixFunction(grid, values, order=order, deriv_values=deriv)


def from_callable(fn, grid, dfn=None, order=3):
    """Sampled function from python callables t -> matrix (and derivative)."""
    values = np.stack([_as_matrix(fn(t), "sample") for t in grid.points])
    deriv = None
    if dfn is not None:
        deriv = np.stack([_as_matrix(dfn(t), "derivative sample") for t in grid.points])
    return SampledMatrixFunction(grid, values, order=order, deriv_values=deriv)


# ---------------------------------------------------------------------------
# algebra on matrix functions, closed over the kinds
# ---------------------------------------------------------------------------

def _kind_rank(f):
    if isinstance(f, ConstantMatrixFunction):
        return 0
    if isinstance(f, PolynomialMatrixFunction):
        return 1
    return 2


def _as_poly(f):
    if isinstance(f, PolynomialMatrixFunction):
        return f
    return PolynomialMatrixFunction(f.value[None, :, :])


def _result_grid(*funs):
    for f in funs:
        if isinstance(f, SampledMatrixFunction):
            return f.grid
    return None


def _sampled_binary(a, b, grid, op, dop):
    va, vb = a.eval_on(grid), b.eval_on(grid)
    da, db = a.derivative_on(grid), b.derivative_on(grid)
    return SampledMatrixFunction(grid, op(va, vb), order=3, deriv_values=dop(va, vb, da, db))


def mf_add(a, b):
    a._check_shape_match(b)
    grid = _result_grid(a, b)
    if grid is not None:
        return _sampled_binary(a, b, grid, lambda x, y: x + y, lambda x, y, dx, dy: dx + dy)
    if _kind_rank(a) == 0 and _kind_rank(b) == 0:
        return ConstantMatrixFunction(a.value + b.value)
    pa, pb = _as_poly(a), _as_poly(b)
    deg = max(pa.degree, pb.degree)
    c = np.zeros((deg + 1, a.rows, a.cols))
    c[: pa.degree + 1] += pa.coeffs
    c[: pb.degree + 1] += pb.coeffs
    return PolynomialMatrixFunction(c)


def mf_scale(a, s):
    if isinstance(a, ConstantMatrixFunction):
        return ConstantMatrixFunction(s * a.value)
    if isinstance(a, PolynomialMatrixFunction):
        return PolynomialMatrixFunction(s * a.coeffs)
    dv = None if a.deriv_values is None else s * a.deriv_values
    return SampledMatrixFunction(a.grid, s * a.values, order=a.order, deriv_values=dv)


def mf_sub(a, b):
    return mf_add(a, mf_scale(b, -1.0))


def mf_matmul(a, b):
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    grid = _result_grid(a, b)
    if grid is not None:
        return _sampled_binary(
            a, b, grid, lambda x, y: x @ y, lambda x, y, dx, dy: dx @ y + x @ dy
        )
    if _kind_rank(a) == 0 and _kind_rank(b) == 0:
        return ConstantMatrixFunction(a.value @ b.value)
    pa, pb = _as_poly(a), _as_poly(b)
    c = np.zeros((pa.degree + pb.degree + 1, a.rows, b.cols))
    for i in range(pa.degree + 1):
        for j in range(pb.degree + 1):
            c[i + j] += pa.coeffs[i] @ pb.coeffs[j]
    return PolynomialMatrixFunction(c)


def mf_transpose(a):
    if isinstance(a, ConstantMatrixFunction):
        return ConstantMatrixFunction(a.value.T)
    if isinstance(a, PolynomialMatrixFunction):
        return PolynomialMatrixFunction(np.transpose(a.coeffs, (0, 2, 1)))
    dv = None if a.deriv_values is None else np.transpose(a.deriv_values, (0, 2, 1))
    return SampledMatrixFunction(
        a.grid, np.transpose(a.values, (0, 2, 1)), order=a.order, deriv_values=dv
    )


def mf_derivative_function(a):
    """The derivative as a MatrixFunction of the same (or simpler) kind."""
    if isinstance(a, ConstantMatrixFunction):
        return zero(a.rows, a.cols)
    if isinstance(a, PolynomialMatrixFunction):
        return a.derivative_function()
    vals = a.derivative_on(a.grid)
    return SampledMatrixFunction(a.grid, vals, order=a.order if a.order == 1 else 3)


def mf_block(blocks):
    """Assemble a block matrix function from a 2d list of blocks.

    Entries may be MatrixFunction or plain arrays (treated as constants).
    """
    norm = [
        [b if isinstance(b, MatrixFunction) else ConstantMatrixFunction(b) for b in row]
        for row in blocks
    ]
    rank = max(_kind_rank(b) for row in norm for b in row)
    if rank == 2:
        grid = _result_grid(*[b for row in norm for b in row])
        vals = np.concatenate(
            [np.concatenate([b.eval_on(grid) for b in row], axis=2) for row in norm], axis=1
        )
        dvals = np.concatenate(
            [np.concatenate([b.derivative_on(grid) for b in row], axis=2) for row in norm],
            axis=1,
        )
        return SampledMatrixFunction(grid, vals, order=3, deriv_values=dvals)
    if rank == 0:
        return ConstantMatrixFunction(
            np.block([[b.value for b in row] for row in norm])
        )
    polys = [[_as_poly(b) for b in row] for row in norm]
    deg = max(p.degree for row in polys for p in row)
    rows = sum(row[0].rows for row in polys)
    cols = sum(p.cols for p in polys[0])
    c = np.zeros((deg + 1, rows, cols))
    r0 = 0
    for row in polys:
        c0 = 0
        for p in row:
            c[: p.degree + 1, r0 : r0 + p.rows, c0 : c0 + p.cols] = p.coeffs
            c0 += p.cols
        r0 += row[0].rows
    return PolynomialMatrixFunction(c)


@dataclass(frozen=True)
class MatrixPair:
    """A pair (E, A) of square matrix functions on a shared interval."""

    E: MatrixFunction
    A: MatrixFunction
    interval: TimeGrid

    def __post_init__(self):
        if self.E.rows != self.E.cols or self.A.rows != self.A.cols:
            raise DimensionError("E and A must be square")
        if self.E.shape != self.A.shape:
            raise DimensionError(f"E is {self.E.shape} but A is {self.A.shape}")

    @property
    def n(self):
        return self.E.rows

    def check_grid(self, grid):
        if not grid.within(self.interval):
            raise DomainError("grid extends beyond the pair's interval")


# ---------------------------------------------------------------------------
# JSON serialization:
# {"rows": n, "cols": m, "kind": "constant"|"poly"|"samples", "data": ...}
# ---------------------------------------------------------------------------

def matrix_function_to_json(f):
    if isinstance(f, ConstantMatrixFunction):
        data = f.value.tolist()
        kind = "constant"
    elif isinstance(f, PolynomialMatrixFunction):
        data = [
            [[float(f.coeffs[k, i, j]) for k in range(f.degree + 1)] for j in range(f.cols)]
            for i in range(f.rows)
        ]
        kind = "poly"
    elif isinstance(f, SampledMatrixFunction):
        data = {
            "grid": f.grid.points.tolist(),
            "values": [v.tolist() for v in f.values],
            "order": f.order,
        }
        if f.deriv_values is not None:
            data["derivatives"] = [v.tolist() for v in f.deriv_values]
        kind = "samples"
    else:
        raise ConstructionError(f"cannot serialize {type(f).__name__}")
    return {"rows": f.rows, "cols": f.cols, "kind": kind, "data": data}


def matrix_function_from_json(obj):
    try:
        rows, cols, kind, data = obj["rows"], obj["cols"], obj["kind"], obj["data"]
    except (KeyError, TypeError) as exc:
        raise ConstructionError(f"malformed matrix function object: missing {exc}")
    if kind == "constant":
        f = ConstantMatrixFunction(data)
    elif kind == "poly":
        f = PolynomialMatrixFunction.from_entries(data)
    elif kind == "samples":
        grid = TimeGrid(data["grid"])
        f = SampledMatrixFunction(
            grid,
            np.array(data["values"], dtype=float),
            order=int(data.get("order", 3)),
            deriv_values=(
                np.array(data["derivatives"], dtype=float)
                if "derivatives" in data
                else None
            ),
        )
    else:
        raise ConstructionError(f"unknown matrix function kind {kind!r}")
    if f.shape != (rows, cols):
        raise ConstructionError(
            f"declared shape ({rows}, {cols}) does not match data shape {f.shape}"
        )
    return f


def pair_to_json(pair):
    return {
        "type": "pair",
        "interval": [pair.interval.t0, pair.interval.tf],
        "E": matrix_function_to_json(pair.E),
        "A": matrix_function_to_json(pair.A),
    }


def pair_from_json(obj):
    t0, tf = obj["interval"]
    interval = TimeGrid.uniform(float(t0), float(tf), 2)
    return MatrixPair(
        matrix_function_from_json(obj["E"]),
        matrix_function_from_json(obj["A"]),
        interval,
    )


def dump_json(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text
