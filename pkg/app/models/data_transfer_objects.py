from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .schema import ConvexCombination

MembershipKind = Literal["ApproxSolution", "Witness"]
VertexMode = Literal["gamma", "K_search", "t_approx"]


class PivotStep(BaseModel):
    """One Triangle-Algorithm step: the gap before/after and r = d(p, pivot)."""
    pivot: int
    alpha: float
    gap_before: float
    gap_after: float
    pivot_distance: float


class MembershipResult(BaseModel):
    """
    :param kind: "ApproxSolution" when the iterate got within epsilon * R of the query, "Witness" otherwise
    :param combination: the final iterate p'
    :param distance_to_query: d(p', p), recomputed from the materialized iterate
    :param epsilon_used: relative tolerance the run was asked for
    :param R: absolute scale the tolerance was measured against
    :param witness_bound: for witnesses, distance from p to the separating hyperplane through the working set
    """
    model_config = ConfigDict(extra="ignore")

    kind: MembershipKind
    combination: ConvexCombination
    distance_to_query: float
    epsilon_used: float
    R: float
    iterations: int = 0
    pivot_steps: int = 0
    mode: Literal["plain", "strict"] = "plain"
    witness_bound: Optional[float] = None
    steps: list[PivotStep] = Field(default_factory=list, exclude=True)

    @property
    def is_witness(self) -> bool:
        return self.kind == "Witness"


class VertexCertificate(BaseModel):
    """
    How a vertex was found: the farthest-point seed, or the support set of a witness direction c' = v - p'.
    """
    index: int
    origin: Literal["farthest-init", "witness"]
    tested_index: Optional[int] = None
    direction: Optional[list[float]] = None
    support: list[int] = Field(default_factory=list)


class VertexReport(BaseModel):
    model_config = ConfigDict(extra="ignore")

    vertex_indices: list[int] = Field(default_factory=list)
    certificates: list[VertexCertificate] = Field(default_factory=list)
    mode: VertexMode = "gamma"
    gamma_used: Optional[float] = None
    t_used: Optional[float] = None
    seed: int = 0
    R: float = 0.0
    diameter_approximate: bool = False
    total_pivots: int = 0
    membership_calls: int = 0
    discarded: int = 0
    gamma_trials: list[float] = Field(default_factory=list)

    @property
    def sorted_indices(self) -> list[int]:
        return sorted(self.vertex_indices)

    def __len__(self) -> int:
        return len(self.vertex_indices)


class PerturbationReport(BaseModel):
    """
    :param superset_indices: vertices found at threshold sigma / 2 (true perturbed vertices plus spurious ones)
    :param pruned_indices: what is left after removing members close to the hull of the others
    :param certificates: final distance-to-others certificate of every superset member
    """
    model_config = ConfigDict(extra="ignore")

    superset_indices: list[int] = Field(default_factory=list)
    pruned_indices: list[int] = Field(default_factory=list)
    removed_indices: list[int] = Field(default_factory=list)
    certificates: dict[int, float] = Field(default_factory=dict)
    sigma_used: float
    epsilon_assumed: float
    seed: int = 0
    R: float = 0.0
    membership_calls: int = 0
    total_pivots: int = 0


class ProjectionCertificate(BaseModel):
    """
    Diagnostics of how well a random projection keeps an outside point outside.

    :param E_ratio: min over points v (other than the closest hull point) of d(p, v) / d(p*, v)
    :param d_min: d(p, p*), distance from the query to the hull
    :param D_max: max over points of d(p, v)
    :param epsilon_bound: (E - 1) / (E + 1)
    :param lower_bound: d^2 / (4 D^2), which epsilon_bound should dominate
    """
    E_ratio: float
    d_min: float
    D_max: float
    epsilon_bound: float
    lower_bound: float
    bound_holds: bool
    closest_point: list[float]


class ConeVerdict(BaseModel):
    feasible: bool
    reason: Literal["zero-rhs", "anchor-separates", "membership"]
    kept_indices: list[int] = Field(default_factory=list)
    anchor: list[float] = Field(default_factory=list)
    membership: Optional[MembershipResult] = None


class RunRecord(BaseModel):
    """One line of the append-only run log; wall_time is the only field allowed to differ between reruns."""
    command: str
    parameters: dict[str, object] = Field(default_factory=dict)
    seed: Optional[int] = None
    wall_time: float = 0.0
    counters: dict[str, int] = Field(default_factory=dict)
    result_path: Optional[str] = None
    exit_code: int = 0


__all__ = [
    "MembershipKind",
    "VertexMode",
    "PivotStep",
    "MembershipResult",
    "VertexCertificate",
    "VertexReport",
    "PerturbationReport",
    "ProjectionCertificate",
    "ConeVerdict",
    "RunRecord",
]
