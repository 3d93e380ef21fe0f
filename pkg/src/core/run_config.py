import math
from dataclasses import dataclass

from configs import settings
from src.core.errors import ConfigError

INPUT_FORMATS = ("csv", "binary", "cloud")


@dataclass
class RunConfig:
    m: int
    input_path: str | None = None
    input_format: str = "csv"
    synth: str | None = None
    landmarks: int | None = None
    lambda_stop: float | None = None
    gamma0: float | None = None
    delta0: float | None = None
    alpha0: float = settings.DEFAULT_ALPHA0
    eta_star: float = settings.DEFAULT_ETA_STAR
    cap: int | None = None
    theoretical: bool = False
    oracle: bool = False
    strict: bool = False
    off_path: str | None = None
    render_path: str | None = None
    save_matrix: str | None = None
    reach: float | None = None
    threads: int = settings.DEFAULT_THREADS
    seed: int = 0
    out_dir: str | None = None
    audit_sample: int = 8
    audit_grid: int = 5
    ledger_path: str | None = settings.LEDGER_DB_PATH

    @property
    def gamma0_value(self) -> float:
        return self.gamma0 if self.gamma0 is not None else settings.default_gamma0(self.m)

    @property
    def delta0_value(self) -> float:
        return self.delta0 if self.delta0 is not None else settings.DEFAULT_DELTA0_RATIO * self.alpha0

    @property
    def alpha0_tilde(self) -> float:
        return math.sqrt(self.alpha0 ** 2 - self.delta0_value ** 2)

    @property
    def mode(self) -> str:
        return "theoretical" if self.theoretical else "practical"

    @property
    def label(self) -> str:
        return self.synth or self.input_path or "unknown"

    def validate(self) -> "RunConfig":
        if (self.input_path is None) == (self.synth is None):
            raise ConfigError("give exactly one input: --input PATH or --synth SPEC")
        if self.input_format not in INPUT_FORMATS:
            raise ConfigError(f"unknown input format '{self.input_format}', expected one of {INPUT_FORMATS}")
        if self.m < 1:
            raise ConfigError(f"intrinsic dimension m must be >= 1, got {self.m}")
        if (self.landmarks is None) == (self.lambda_stop is None):
            raise ConfigError("give exactly one landmark stop rule: --landmarks K or --lambda X")
        if self.landmarks is not None and self.landmarks < 1:
            raise ConfigError(f"--landmarks must be >= 1, got {self.landmarks}")
        if self.lambda_stop is not None and self.lambda_stop <= 0:
            raise ConfigError(f"--lambda must be positive, got {self.lambda_stop}")
        if not 0.0 < self.alpha0 < 0.5:
            raise ConfigError(f"alpha0 must lie in (0, 1/2), got {self.alpha0}")
        if not 0.0 <= self.delta0_value < self.alpha0:
            raise ConfigError(f"delta0 must lie in [0, alpha0), got {self.delta0_value}")
        if not 0.0 < self.gamma0_value < 1.0:
            raise ConfigError(f"Gamma0 must lie in (0, 1), got {self.gamma0_value}")
        if self.eta_star <= 0:
            raise ConfigError(f"--eta must be positive, got {self.eta_star}")
        if self.cap is not None and self.cap < 1:
            raise ConfigError(f"--cap must be >= 1, got {self.cap}")
        if self.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {self.threads}")
        if self.reach is not None and self.reach <= 0:
            raise ConfigError(f"--reach must be positive, got {self.reach}")
        return self
