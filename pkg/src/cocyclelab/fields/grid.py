"""Grid-sampled periodic fields with spline interpolation.

Samples live on the cell-corner grid ``x_i = q_i * j / n_i``.  Interpolation
uses periodic B-splines (``scipy.ndimage`` with ``grid-wrap``), which is
accurate to roughly ``h**order`` for smooth data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.fft import fft2, fftfreq

from . import expr as E
from .trigpoly import TrigPoly


def grid_points(shape, cover=(1, 1)):
    n1, n2 = shape
    g1 = cover[0] * np.arange(n1) / n1
    g2 = cover[1] * np.arange(n2) / n2
    return np.meshgrid(g1, g2, indexing="ij")


@dataclass(eq=False)
class GridField:
    """Periodic scalar field known through samples on a regular grid.

    ``values`` may carry trailing component axes; every component is
    interpolated independently.
    """

    values: np.ndarray
    cover: tuple = (1, 1)
    order: int = 3
    _coeffs: np.ndarray | None = field(default=None, repr=False)
    is_matrix = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.cover = (int(self.cover[0]), int(self.cover[1]))

    @classmethod
    def sample(cls, fn, shape=(128, 128), cover=(1, 1), order=3):
        x1, x2 = grid_points(shape, cover)
        v = fn.evaluate(x1, x2) if hasattr(fn, "evaluate") else fn(x1, x2)
        return cls(np.asarray(v, dtype=float), cover, order)

    @property
    def shape(self):
        return self.values.shape[:2]

    def _prefiltered(self):
        if self._coeffs is None:
            v = self.values.reshape(self.shape + (-1,))
            if self.order <= 1:
                self._coeffs = v
                return v
            self._coeffs = np.stack(
                [ndimage.spline_filter(v[..., c], order=self.order, mode="grid-wrap") for c in range(v.shape[-1])],
                -1,
            )
        return self._coeffs

    def evaluate(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        n1, n2 = self.shape
        u = np.mod(x1, self.cover[0]) * n1 / self.cover[0]
        v = np.mod(x2, self.cover[1]) * n2 / self.cover[1]
        coords = np.stack([u.ravel(), v.ravel()])
        coef = self._prefiltered()
        out = np.stack(
            [
                ndimage.map_coordinates(coef[..., c], coords, order=self.order, mode="grid-wrap", prefilter=False)
                for c in range(coef.shape[-1])
            ],
            -1,
        )
        tail = self.values.shape[2:]
        return out.reshape(x1.shape + tail)

    def __call__(self, x1, x2):
        return self.evaluate(x1, x2)

    def to_trigpoly(self, max_degree: int | None = None, tol: float = 0.0) -> TrigPoly:
        """Project onto Fourier modes with the FFT (aliasing-limited, not exact)."""
        if self.values.ndim != 2:
            raise E.FieldError("only scalar grids project to a TrigPoly")
        n1, n2 = self.shape
        c = fft2(self.values) / (n1 * n2)
        k1 = np.rint(fftfreq(n1) * n1).astype(int)
        k2 = np.rint(fftfreq(n2) * n2).astype(int)
        coeffs = {}
        lim1 = n1 // 2 - 1 if max_degree is None else min(max_degree, n1 // 2 - 1)
        lim2 = n2 // 2 - 1 if max_degree is None else min(max_degree, n2 // 2 - 1)
        for a in range(n1):
            if abs(k1[a]) > lim1:
                continue
            for b in range(n2):
                if abs(k2[b]) > lim2 or abs(c[a, b]) <= tol:
                    continue
                coeffs[(int(k1[a]), int(k2[b]))] = c[a, b]
        return TrigPoly(coeffs, self.cover)

    def to_json(self) -> dict:
        return {
            "node": "grid",
            "cover": list(self.cover),
            "order": self.order,
            "shape": list(self.values.shape),
            "values": self.values.ravel().tolist(),
        }
