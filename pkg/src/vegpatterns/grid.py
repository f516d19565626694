"""Uniform 1-D grid and the discretized (B, W, T) field state.

States serialize to CSV (columns x, B, W, T) and JSON at full double
precision; both formats round-trip losslessly.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .model import HomogeneousState
from .params import ModelParams

#: componentwise slack below zero tolerated in physically admissible states
ADMISSIBILITY_SLACK = -1e-12


@dataclass(frozen=True)
class GridSpec:
    """N equal intervals on [0, L]; N+1 nodes including both boundaries."""

    L: float
    N: int

    def __post_init__(self):
        if self.N < 8:
            raise InvalidArgumentError(f"grid needs N >= 8 intervals, got {self.N}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise InvalidArgumentError(f"domain length must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def n_nodes(self) -> int:
        return self.N + 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.h

    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights (h/2, h, ..., h, h/2)."""
        w = np.full(self.N + 1, self.h)
        w[0] = w[-1] = self.h / 2.0
        return w


class FieldState:
    """Per-node (B, W, T) profiles on a :class:`GridSpec`."""

    __slots__ = ("grid", "B", "W", "T")

    def __init__(self, grid: GridSpec, B, W, T):
        B = np.asarray(B, dtype=float)
        W = np.asarray(W, dtype=float)
        T = np.asarray(T, dtype=float)
        n = grid.n_nodes
        if not (B.shape == W.shape == T.shape == (n,)):
            raise InvalidArgumentError(
                f"field arrays must all have shape ({n},); "
                f"got {B.shape}, {W.shape}, {T.shape}"
            )
        self.grid = grid
        self.B = B
        self.W = W
        self.T = T

    @classmethod
    def uniform(cls, grid: GridSpec, state: HomogeneousState) -> "FieldState":
        n = grid.n_nodes
        return cls(grid, np.full(n, state.B), np.full(n, state.W), np.full(n, state.T))

    @classmethod
    def from_flat(cls, grid: GridSpec, u: np.ndarray) -> "FieldState":
        u = np.asarray(u, dtype=float)
        if u.shape != (3 * grid.n_nodes,):
            raise InvalidArgumentError(
                f"flat vector must have length {3 * grid.n_nodes}, got {u.shape}"
            )
        return cls(grid, u[0::3].copy(), u[1::3].copy(), u[2::3].copy())

    def as_flat(self) -> np.ndarray:
        """Node-major vector (B0, W0, T0, B1, W1, T1, ...)."""
        u = np.empty(3 * self.grid.n_nodes)
        u[0::3] = self.B
        u[1::3] = self.W
        u[2::3] = self.T
        return u

    def copy(self) -> "FieldState":
        return FieldState(self.grid, self.B.copy(), self.W.copy(), self.T.copy())

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.B))
            and np.all(np.isfinite(self.W))
            and np.all(np.isfinite(self.T))
        )

    def is_physical(self) -> bool:
        """B and W nonnegative up to round-off slack."""
        return bool(np.all(self.B >= ADMISSIBILITY_SLACK)
                    and np.all(self.W >= ADMISSIBILITY_SLACK))

    def mass(self) -> float:
        """Trapezoid integral of B + W + T over the domain."""
        w = self.grid.trapezoid_weights()
        return float(w @ self.B + w @ self.W + w @ self.T)

    # --- serialization -------------------------------------------------

    def to_csv(self, path=None) -> str:
        """CSV with columns x, B, W, T at full double precision."""
        buf = io.StringIO()
        buf.write("x,B,W,T\n")
        for x, b, wv, t in zip(self.grid.x, self.B, self.W, self.T):
            buf.write(f"{float(x)!r},{float(b)!r},{float(wv)!r},{float(t)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, text_or_path, grid: GridSpec | None = None) -> "FieldState":
        if "\n" not in str(text_or_path):
            with open(text_or_path, "r", encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = text_or_path
        rows = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
        header = rows[0].split(",")
        if [c.strip() for c in header] != ["x", "B", "W", "T"]:
            raise InvalidArgumentError(f"unexpected CSV header: {rows[0]!r}")
        data = np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])
        x = data[:, 0]
        if grid is None:
            N = len(x) - 1
            grid = GridSpec(L=float(x[-1]), N=N)
        return cls(grid, data[:, 1], data[:, 2], data[:, 3])

    def to_json(self, path=None) -> str:
        doc = {
            "L": self.grid.L,
            "N": self.grid.N,
            "B": self.B.tolist(),
            "W": self.W.tolist(),
            "T": self.T.tolist(),
        }
        text = json.dumps(doc)
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_json(cls, text_or_path) -> "FieldState":
        if str(text_or_path).lstrip().startswith("{"):
            doc = json.loads(text_or_path)
        else:
            with open(text_or_path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        grid = GridSpec(L=doc["L"], N=doc["N"])
        return cls(grid, doc["B"], doc["W"], doc["T"])


def default_grid(params: ModelParams, N: int = 200) -> GridSpec:
    return GridSpec(L=params.L, N=N)
