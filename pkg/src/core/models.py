from __future__ import annotations

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


DEFAULT_SAMPLE_RATE = 44100
DEFAULT_KAPPA = 0.2521
DEFAULT_LAMBDA = 0.5
DEFAULT_SMOOTH_K = 2


# Obfuscation kinds of the source taxonomy (rigid: noises, reverb, filters;
# topological: tempo and pitch shift)
ObfuscationKind = Literal[
    "white_noise",
    "pink_noise",
    "reverb",
    "high_pass",
    "low_pass",
    "tempo_shift",
    "pitch_shift",
]

Label = Literal["positive", "negative"]
MedianEdge = Literal["shrink", "truncate"]


class StftConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_fft: int = Field(1024, ge=2)
    hop: int = Field(256, gt=0)
    n_mels: int = Field(128, ge=2)
    f_min: Optional[float] = None  # None -> Rayleigh frequency f_s / n_fft
    f_max: Optional[float] = None  # None -> Nyquist frequency f_s / 2
    db_floor: float = Field(80.0, gt=0)

    @model_validator(mode="after")
    def _check_hop(self) -> "StftConfig":
        if self.hop > self.n_fft:
            raise ValueError(f"hop ({self.hop}) must not exceed n_fft ({self.n_fft})")
        if self.f_min is not None and self.f_max is not None and not 0 < self.f_min < self.f_max:
            raise ValueError(f"need 0 < f_min < f_max, got f_min={self.f_min}, f_max={self.f_max}")
        return self

    def band(self, sample_rate: int) -> Tuple[float, float]:
        """Resolve (f_min, f_max) in Hz for a sampling rate."""
        lo = self.f_min if self.f_min is not None else sample_rate / self.n_fft
        hi = self.f_max if self.f_max is not None else sample_rate / 2.0
        if not 0 < lo < hi <= sample_rate / 2.0:
            raise ValueError(
                f"mel band [{lo}, {hi}] Hz is invalid for sample rate {sample_rate} Hz"
            )
        return float(lo), float(hi)


class FingerprintConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    omega: float = Field(1.0, gt=0)  # window length, seconds
    tau: float = Field(0.4, ge=0, lt=1)  # overlap fraction
    lam: float = Field(DEFAULT_LAMBDA, ge=0, le=1)
    betti_res: int = Field(256, ge=2)
    betti_lo: float = 0.0
    betti_hi: float = 1.0
    stft: StftConfig = Field(default_factory=StftConfig)

    @model_validator(mode="after")
    def _check_domain(self) -> "FingerprintConfig":
        if not self.betti_lo < self.betti_hi:
            raise ValueError(f"Betti domain must satisfy lo < hi, got [{self.betti_lo}, {self.betti_hi}]")
        return self

    @property
    def step_seconds(self) -> float:
        return (1.0 - self.tau) * self.omega


class MatchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: float = Field(DEFAULT_LAMBDA, ge=0, le=1)
    smooth_k: int = Field(DEFAULT_SMOOTH_K, ge=0)
    kappa: float = DEFAULT_KAPPA
    median_edge: MedianEdge = "shrink"


class ObfuscationSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: ObfuscationKind
    degree: float

    @model_validator(mode="after")
    def _check_degree(self) -> "ObfuscationSpec":
        d = self.degree
        if d != d or d in (float("inf"), float("-inf")):
            raise ValueError("degree must be finite")
        if self.kind in ("white_noise", "pink_noise") and d < 0:
            raise ValueError(f"{self.kind} degree is a noise-to-signal RMS ratio and must be >= 0")
        if self.kind == "reverb" and not 0 <= d <= 100:
            raise ValueError("reverb degree is a wet percentage in [0, 100]")
        if self.kind in ("high_pass", "low_pass") and d <= 0:
            raise ValueError(f"{self.kind} degree is a cutoff in Hz and must be > 0")
        if self.kind == "tempo_shift" and d <= 0:
            raise ValueError("tempo_shift degree is a stretch factor and must be > 0")
        if self.kind == "pitch_shift" and (d != int(d) or not -12 <= d <= 12):
            raise ValueError("pitch_shift degree must be an integer number of semitones in [-12, 12]")
        return self

    @property
    def descriptor(self) -> str:
        return f"{self.kind}:{self.degree:g}"


class MatchResult(BaseModel):
    pairs: List[Tuple[float, float]]
    smoothed: List[Tuple[float, float]]
    index_pairs: List[Tuple[int, int]] = Field(default_factory=list)
    rho: float
    error: float
    decision: Label
    kappa: float
    lam: float
    smooth_k: int

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    def summary(self) -> Dict[str, object]:
        return {
            "error": self.error,
            "rho": self.rho,
            "n_pairs": self.n_pairs,
            "decision": self.decision,
            "kappa": self.kappa,
            "lambda": self.lam,
        }


class ManifestRow(BaseModel):
    path_a: str
    path_b: str
    label: Label
    obfuscation: Optional[str] = None


class PairRecord(BaseModel):
    index: int
    label: Label
    group: str
    error: float
    rho: float
    n_pairs: int
    decision: Label


class RocPoint(BaseModel):
    threshold: float
    fpr: float
    tpr: float


class BatchMetrics(BaseModel):
    kappa: float
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    fpr: float
    auc: float
    learned_kappa: float
    learned_accuracy: float
    target_fpr: float
    records: List[PairRecord] = Field(default_factory=list)
    roc: List[RocPoint] = Field(default_factory=list)
    lam: float = DEFAULT_LAMBDA
    lambda_sweep: Dict[str, float] = Field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn
