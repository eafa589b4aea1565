from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, confloat, conint, field_validator, model_validator

from .errors import InvalidInputError

WEIGHT_SUM_TOLERANCE = 1e-12


class ConvexCombination(BaseModel):
    """
    Sparse non-negative weights over point indices, summing to one.

    The point it denotes (sum of weight * point) is only built on request, see ``utils.distance.materialize``.
    """
    model_config = ConfigDict(frozen=True)

    weights: dict[int, float]

    @field_validator("weights")
    @classmethod
    def _check_weights(cls, weights: dict[int, float]) -> dict[int, float]:
        if not weights:
            raise ValueError("a convex combination needs at least one index")
        for index, weight in weights.items():
            if index < 0:
                raise ValueError(f"negative index {index}")
            if not np.isfinite(weight) or weight < 0:
                raise ValueError(f"weight of index {index} must be finite and non-negative, got {weight}")
        total = sum(weights.values())
        if total <= 0:
            raise ValueError("weights sum to zero")
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            weights = {index: weight / total for index, weight in weights.items()}
        return weights

    @property
    def support(self) -> list[int]:
        return sorted(index for index, weight in self.weights.items() if weight > 0)

    @classmethod
    def vertex(cls, index: int) -> "ConvexCombination":
        return cls(weights={int(index): 1.0})

    @classmethod
    def from_arrays(cls, indices, weights, drop_zeros: bool = True) -> "ConvexCombination":
        pairs = {
            int(index): float(weight)
            for index, weight in zip(indices, weights)
            if not drop_zeros or weight > 0
        }
        return cls(weights=pairs)

    def check_indices(self, n: int) -> None:
        bad = [index for index in self.weights if index >= n]
        if bad:
            raise InvalidInputError(f"combination refers to indices {bad} outside a set of {n} points")

    def __len__(self) -> int:
        return len(self.weights)

    def __contains__(self, index: int) -> bool:
        return index in self.weights


class RobustnessParams(BaseModel):
    """
    Parameters describing how robust the hull is assumed to be.
    At most one of gamma / sigma / t / K_known drives a run.

    :param gamma: lower bound on (min vertex distance to the hull of the other vertices) / R
    :param sigma: lower bound on (min vertex distance to the hull of all other points) / R
    :param t: coarse-approximation radius, as a fraction of R
    :param K_known: number of vertices, when known
    :param epsilon_perturb: perturbation scale, as a fraction of R
    :param R: diameter (computed)
    :param rho_star: minimum pairwise distance (computed)
    """
    model_config = ConfigDict(extra="ignore")

    gamma: Optional[confloat(gt=0, lt=1)] = None
    sigma: Optional[confloat(gt=0, lt=1)] = None
    t: Optional[confloat(gt=0, lt=1)] = None
    K_known: Optional[conint(ge=1)] = None
    epsilon_perturb: confloat(ge=0) = 0.0
    R: Optional[confloat(ge=0)] = None
    rho_star: Optional[confloat(ge=0)] = None

    @model_validator(mode="after")
    def _single_mode(self):
        drivers = [name for name in ("gamma", "sigma", "t", "K_known") if getattr(self, name) is not None]
        if len(drivers) > 1:
            raise ValueError(f"only one of gamma, sigma, t, K_known may drive a run, got {drivers}")
        if self.R is not None and self.rho_star is not None and self.rho_star > self.R:
            raise ValueError("rho_star cannot exceed the diameter R")
        return self

    @property
    def mode(self) -> Optional[Literal["gamma", "sigma", "t", "k"]]:
        if self.gamma is not None:
            return "gamma"
        if self.sigma is not None:
            return "sigma"
        if self.t is not None:
            return "t"
        if self.K_known is not None:
            return "k"
        return None


class InstanceSpec(BaseModel):
    """
    Synthetic hull instance: K vertices, n - K convex combinations of them, optional noise.

    :param vertex_dist: "gaussian" is N(0, I), "gaussian10" is N(0, 10 I), "uniform01" is U(0, 1) per coordinate
    :param noise: "gaussian" adds N(0, noise_scale) per coordinate (noise_scale is the variance),
        "uniform" adds U(-noise_scale, noise_scale)
    :param ensure_convex_position: regenerate the vertices until they are in convex position
    """
    model_config = ConfigDict(extra="ignore", frozen=True)

    K: conint(ge=1)
    n: conint(ge=1)
    m: conint(ge=1)
    vertex_dist: Literal["gaussian", "gaussian10", "uniform01"] = "gaussian"
    noise: Literal["none", "gaussian", "uniform"] = "none"
    noise_scale: confloat(ge=0) = 0.0
    seed: conint(ge=0) = 0
    ensure_convex_position: bool = True

    @model_validator(mode="after")
    def _k_not_above_n(self):
        if self.K > self.n:
            raise ValueError(f"K={self.K} cannot exceed n={self.n}")
        return self


class LinearSystem(BaseModel):
    """
    ``A x = b, x >= 0`` with optional cost row ``c``. Columns of A are the generators.

    :param anchor: direction a of the scaling hyperplane <a, x> = beta used by the cone reduction; ones when absent
    :param beta: level of the scaling hyperplane
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    A: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None
    anchor: Optional[np.ndarray] = None
    beta: confloat(gt=0) = 1.0

    @field_validator("A", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        matrix = np.asarray(value, dtype=float)
        if matrix.ndim != 2 or 0 in matrix.shape:
            raise ValueError(f"A must be a non-empty matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("A has non-finite entries")
        return matrix

    @field_validator("b", "c", "anchor", mode="before")
    @classmethod
    def _as_vector(cls, value):
        if value is None:
            return None
        vector = np.asarray(value, dtype=float).reshape(-1)
        if not np.all(np.isfinite(vector)):
            raise ValueError("vector has non-finite entries")
        return vector

    @model_validator(mode="after")
    def _check_shapes(self):
        m, n = self.A.shape
        if self.b.shape != (m,):
            raise ValueError(f"b must have {m} entries, got {self.b.shape[0]}")
        if self.c is not None and self.c.shape != (n,):
            raise ValueError(f"c must have {n} entries, got {self.c.shape[0]}")
        if self.anchor is not None and self.anchor.shape != (m,):
            raise ValueError(f"anchor must have {m} entries, got {self.anchor.shape[0]}")
        return self

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def restrict(self, columns: list[int]) -> "LinearSystem":
        columns = list(columns)
        return LinearSystem(
            A=self.A[:, columns],
            b=self.b,
            c=None if self.c is None else self.c[columns],
            anchor=self.anchor,
            beta=self.beta,
        )


class JlMap(BaseModel):
    """
    Gaussian random linear map R^source_dim -> R^target_dim, entries N(0, 1) / sqrt(target_dim).
    Immutable once drawn.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    seed: int
    target_dim: conint(ge=1)
    source_dim: conint(ge=1)

    @model_validator(mode="after")
    def _check_matrix(self):
        if self.matrix.shape != (self.target_dim, self.source_dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match "
                             f"({self.target_dim}, {self.source_dim})")
        self.matrix.setflags(write=False)
        return self

    @classmethod
    def draw(cls, source_dim: int, target_dim: int, seed: int) -> "JlMap":
        rng = np.random.default_rng(seed)
        matrix = rng.standard_normal((target_dim, source_dim)) / np.sqrt(target_dim)
        return cls(matrix=matrix, seed=seed, target_dim=target_dim, source_dim=source_dim)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.source_dim:
            raise InvalidInputError(f"map expects dimension {self.source_dim}, got {x.shape[-1]}")
        return x @ self.matrix.T


__all__ = [
    "ConvexCombination",
    "RobustnessParams",
    "InstanceSpec",
    "LinearSystem",
    "JlMap",
    "WEIGHT_SUM_TOLERANCE",
]
