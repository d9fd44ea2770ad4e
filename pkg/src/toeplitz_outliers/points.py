"""Finite point samples (eigenvalue outliers or field zeros) with region labels."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class PointProcessSample:
    points: np.ndarray  # complex
    labels: np.ndarray  # winding index per point (0 when unlabelled)
    multiplicity: np.ndarray
    provenance: str = "field-zero"
    metadata: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, provenance: str = "field-zero", metadata: dict = None) -> "PointProcessSample":
        return cls(np.zeros(0, dtype=complex), np.zeros(0, dtype=int), np.zeros(0, dtype=int),
                   provenance, dict(metadata or {}))

    def __len__(self) -> int:
        return int(self.points.size)

    @property
    def count(self) -> int:
        """Number of points counted with multiplicity."""
        return int(self.multiplicity.sum())

    def in_window(self, window) -> np.ndarray:
        x0, x1, y0, y1 = window
        z = self.points
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    def count_in(self, window) -> int:
        return int(self.multiplicity[self.in_window(window)].sum())

    def to_json(self) -> dict:
        return {
            "provenance": self.provenance,
            "metadata": self.metadata,
            "points": [{"re": float(z.real), "im": float(z.imag), "wind": int(w), "multiplicity": int(m)}
                       for z, w, m in zip(self.points, self.labels, self.multiplicity)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PointProcessSample":
        pts = obj.get("points", [])
        return cls(np.array([complex(p["re"], p["im"]) for p in pts], dtype=complex),
                   np.array([p.get("wind", 0) for p in pts], dtype=int),
                   np.array([p.get("multiplicity", 1) for p in pts], dtype=int),
                   obj.get("provenance", "field-zero"), dict(obj.get("metadata", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)
