import os
from functools import lru_cache

from pydantic import BaseModel, ConfigDict, confloat, conint


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


class Settings(BaseModel):
    """
    Run-wide defaults. Every algorithm accepts explicit keyword overrides, these only fill the gaps.

    :param seed: default RNG seed when a command is not given one (AVTA_SEED)
    :param log_level: root logger level for the CLI (AVTA_LOG_LEVEL)
    :param debug_checks: recompute solver state from scratch every iteration and compare (AVTA_DEBUG)
    :param approximate_diameter: allow the 2-approximate diameter above the threshold (AVTA_APPROX_DIAMETER)
    :param diameter_exact_threshold: point count above which the approximate diameter kicks in
    :param argmax_tolerance: support-set argmax band, relative to |c'| times the coordinate scale
    :param jl_constant: universal constant c in the target dimension c * ln(n) / eps^2
    :param gamma_floor: smallest gamma tried by the K-driven search
    :param certificate_epsilon: accuracy used when locating the closest hull point for certificates
    :param consistency_rtol: relative tolerance of the debug consistency check
    """
    model_config = ConfigDict(frozen=True)

    seed: conint(ge=0) = 0
    log_level: str = "WARNING"
    debug_checks: bool = False
    approximate_diameter: bool = False
    diameter_exact_threshold: conint(ge=2) = 20_000
    argmax_tolerance: confloat(ge=0) = 1e-12
    jl_constant: confloat(gt=0) = 4.0
    gamma_floor: confloat(gt=0, lt=1) = 2.0 ** -40
    certificate_epsilon: confloat(gt=0, lt=1) = 1e-6
    consistency_rtol: confloat(gt=0) = 1e-8

    @classmethod
    def from_env(cls) -> "Settings":
        values: dict = {}
        if "AVTA_SEED" in os.environ:
            values["seed"] = int(os.environ["AVTA_SEED"])
        if "AVTA_LOG_LEVEL" in os.environ:
            values["log_level"] = os.environ["AVTA_LOG_LEVEL"].upper()
        if "AVTA_DEBUG" in os.environ:
            values["debug_checks"] = _env_flag("AVTA_DEBUG")
        if "AVTA_APPROX_DIAMETER" in os.environ:
            values["approximate_diameter"] = _env_flag("AVTA_APPROX_DIAMETER")
        return cls(**values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()


