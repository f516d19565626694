"""Model parameters and their JSON round-trip.

Default values follow the published parameter table for the
biomass-water-toxicity model, with one amendment: the toxicity sensitivity
``s`` defaults to 0.1.  The printed table value (0.2) is inconsistent with
every critical value reported for the model (fold at p=0.64 with biomass
0.156, pattern onsets at p=1.14 and 1.06); all of them are reproduced
exactly when the product q*s is 0.005.  See the repository notes for the
full derivation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InvalidArgumentError

#: order matches the kernel parameter array
_PAR_ORDER = ("c", "d", "k", "l", "q", "r", "s", "w", "D_B", "D_W")


@dataclass(frozen=True)
class ModelParams:
    """The ten rate/diffusion constants plus the domain length ``L``.

    Units: c, r in m^4 kg^-2 t^-1; d, k, l in t^-1; s in m^2 kg^-1 t^-1;
    w in m^2 kg^-1; q dimensionless; D_B, D_W in m^2 t^-1; L in m.
    """

    c: float = 0.002    # biomass growth rate
    d: float = 0.01     # biomass death rate
    k: float = 0.01     # toxin decay rate
    l: float = 0.01     # evaporation rate
    q: float = 0.05     # toxin fraction of dead biomass
    r: float = 0.35     # water-uptake rate
    s: float = 0.1      # toxicity sensitivity (see module docstring)
    w: float = 0.001    # toxin wash-out rate
    D_B: float = 0.01   # biomass diffusion
    D_W: float = 0.8    # water diffusion
    L: float = 8.0      # domain length

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidArgumentError(
                    f"parameter {f.name} must be strictly positive and finite, got {v!r}"
                )

    def kernel_array(self) -> np.ndarray:
        """Rates and diffusivities as the flat array the kernels consume."""
        return np.array([getattr(self, name) for name in _PAR_ORDER])

    def replace(self, **kwargs) -> "ModelParams":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kwargs)
        return ModelParams(**vals)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        """Build from a mapping; unknown keys are rejected, missing keys default."""
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ModelParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))
