"""
Pydantic models for sweep configuration and result rows
"""
import itertools
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationInfo, field_validator, model_validator

from config.settings import (
    DEFAULT_SEED,
    EIGEN_TOL,
    KNOWN_CHECKS,
    RESULT_COLUMNS,
    RESULTS_DIR,
    SWEEP_AXES,
)
from onebody.hypotheses import validate_hypotheses
from onebody.modes import CouplingFamily, ModelParams, ModeSet, ModeTag
from spectra.analysis import Cutoffs
from spectra.eigensolver import METHODS


class ModeRow(BaseModel):
    """One row of the [modes] table"""
    energy: float
    weight: float
    tag: str = ModeTag.ESSENTIAL.value

    @field_validator('tag')
    def validate_tag(cls, v):
        if v not in {t.value for t in ModeTag}:
            raise ValueError(f"mode tag must be 'discrete' or 'essential' (got '{v}')")
        return v


class GridPoint(BaseModel):
    """Position in the sweep grid; coordinates keep the axis order"""
    index: int
    coordinates: Dict[str, float]

    def label(self) -> str:
        return ";".join(f"{axis}={value:g}" for axis, value in self.coordinates.items())


class SweepConfig(BaseModel):
    """Model template, sweep axes, cutoff schedule and checks to run"""
    label: str = ""
    order: int = Field(..., ge=1, description="n; the model has 2n coupling terms")
    eta: float = 0.0
    alpha: List[float]
    modes: List[ModeRow]
    coupling: Dict[int, List[Tuple[float, float]]] = Field(
        ..., description="coupling index (1-based) -> (real, imag) amplitude per mode"
    )
    cutoffs: List[int] = Field(..., description="N_max schedule; the last entry is the analysis cutoff")
    checks: List[str] = Field(default_factory=lambda: ["decompose", "ground"])
    sweep: Dict[str, List[float]] = Field(default_factory=dict)
    seed: int = DEFAULT_SEED
    workers: Optional[int] = Field(default=None, ge=1)
    output: Path = RESULTS_DIR
    tol: float = Field(default=EIGEN_TOL, gt=0)
    eigen_count: int = Field(default=4, ge=1)
    method: str = "auto"

    @field_validator('modes')
    def validate_modes(cls, v):
        if not v:
            raise ValueError("at least one mode is required")
        for k, row in enumerate(v):
            if not row.energy > 0:
                raise ValueError(f"mode {k}: energy must be positive (got {row.energy})")
            if not row.weight > 0:
                raise ValueError(f"mode {k}: weight must be positive (got {row.weight})")
        return v

    @field_validator('cutoffs')
    def validate_cutoffs(cls, v):
        if not v:
            raise ValueError("cutoff schedule is empty")
        if any(n < 1 for n in v):
            raise ValueError(f"cutoffs must be >= 1 (got {v})")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError(f"cutoffs must be non-decreasing (got {v})")
        return v

    @field_validator('checks')
    def validate_checks(cls, v):
        unknown = [c for c in v if c not in KNOWN_CHECKS]
        if unknown:
            raise ValueError(f"unknown checks {unknown} (known: {', '.join(KNOWN_CHECKS)})")
        return v

    @field_validator('method')
    def validate_method(cls, v):
        if v not in METHODS:
            raise ValueError(f"unknown eigensolver method '{v}'")
        return v

    @field_validator('alpha')
    def validate_alpha(cls, v, info: ValidationInfo):
        order = info.data.get('order')
        if order is not None and len(v) != 2 * order:
            raise ValueError(f"alpha has {len(v)} entries but order {order} needs {2 * order}")
        return v

    @field_validator('coupling')
    def validate_coupling(cls, v, info: ValidationInfo):
        order, modes = info.data.get('order'), info.data.get('modes')
        if order is not None and sorted(v) != list(range(1, 2 * order + 1)):
            raise ValueError(f"coupling rows must be exactly 1..{2 * order} (got {sorted(v)})")
        if modes is not None:
            for i, row in v.items():
                if len(row) != len(modes):
                    raise ValueError(f"coupling row {i} has {len(row)} amplitudes for {len(modes)} modes")
        return v

    @field_validator('sweep')
    def validate_sweep(cls, v, info: ValidationInfo):
        top = 2 * info.data.get('order', 0)
        for axis, values in v.items():
            if not values:
                raise ValueError(f"sweep axis '{axis}' has no values")
            if axis in SWEEP_AXES or (axis.startswith("alpha.") and axis[6:].isdigit()
                                      and 1 <= int(axis[6:]) <= top):
                continue
            raise ValueError(f"sweep axis '{axis}' does not name a parameter")
        if any(n < 1 or n != int(n) for n in v.get("n_max", [])):
            raise ValueError("n_max axis values must be positive integers")
        return v

    @model_validator(mode='after')
    def validate_hypothesis_one(self):
        report = validate_hypotheses(self.template())
        if not report.passed('hyp1'):
            raise ValueError(f"Hypothesis 1 fails for the template: {report.results['hyp1'].reason}")
        return self

    def mode_set(self) -> ModeSet:
        return ModeSet.from_rows(((m.energy, m.weight, m.tag) for m in self.modes), label=self.label)

    def coupling_family(self) -> CouplingFamily:
        vectors = np.array([[complex(re, im) for re, im in self.coupling[i]]
                            for i in range(1, 2 * self.order + 1)])
        return CouplingFamily(order=self.order, vectors=vectors)

    def template(self) -> ModelParams:
        return ModelParams(eta=self.eta, alpha=self.alpha, coupling=self.coupling_family(),
                           modes=self.mode_set())

    @property
    def analysis_cutoff(self) -> int:
        return self.cutoffs[-1]

    def grid(self) -> List[GridPoint]:
        """Cartesian product of the axes in declaration order, last axis fastest"""
        axes = list(self.sweep)
        combos = itertools.product(*(self.sweep[a] for a in axes)) if axes else [()]
        return [
            GridPoint(index=i, coordinates=dict(zip(axes, values)))
            for i, values in enumerate(combos)
        ]

    def point_params(self, point: GridPoint) -> Tuple[ModelParams, Cutoffs]:
        """Model and cutoffs at one grid point"""
        params = self.template()
        alpha = np.array(self.alpha, dtype=float)
        for axis, value in point.coordinates.items():
            if axis.startswith("alpha."):
                alpha[int(axis[6:]) - 1] = value
        params = params.with_alpha(alpha)
        if "eta" in point.coordinates:
            params = params.with_eta(point.coordinates["eta"])
        if "coupling_scale" in point.coordinates:
            params = params.scaled(point.coordinates["coupling_scale"])
        n_max = int(point.coordinates.get("n_max", self.analysis_cutoff))
        cutoffs = Cutoffs(n_max=n_max, eigen_count=self.eigen_count, tol=self.tol,
                          method=self.method, seed=self.seed)
        return params, cutoffs

    def schedule_for(self, n_max: int) -> List[int]:
        """Config cutoffs below the analysis cutoff, then the analysis cutoff itself"""
        return sorted({c for c in self.cutoffs if c < n_max} | {n_max})


class ResultRow(BaseModel):
    """One grid point of a sweep; CSV columns follow RESULT_COLUMNS"""
    grid_index: int
    coordinates: str
    eta: float
    coupling_scale: float = 1.0
    n_max: int
    E_full: Optional[float] = None
    E_minus: Optional[float] = None
    E_plus: Optional[float] = None
    gap: Optional[float] = None
    degeneracy: Optional[int] = None
    excited_flag: Optional[bool] = None
    offblock_norm: Optional[float] = None
    leakage: Optional[float] = None
    pullthrough_residual: Optional[float] = None
    status: str = "ok"
    reason_codes: List[str] = Field(default_factory=list)
    timing_seconds: float = 0.0
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.reason_codes)

    def csv_record(self) -> Dict[str, Any]:
        record = self.model_dump(include=set(RESULT_COLUMNS))
        record['reason_codes'] = ";".join(self.reason_codes)
        return {column: record[column] for column in RESULT_COLUMNS}
