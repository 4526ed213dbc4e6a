"""
Discretized one-boson space: modes, coupling families and model parameters

The one-boson space is a finite weighted mode set. A mode carries an energy
omega_k > 0, a quadrature weight w_k > 0 and a discrete/essential tag. Coupling
vectors are raw function values per mode; inner products are weight-summed.
"""
import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import DimensionError


class ModeTag(Enum):
    """Spectral role of a mode"""
    DISCRETE = "discrete"
    ESSENTIAL = "essential"


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Finite mode grid; omega acts as a diagonal multiplication operator"""
    energies: np.ndarray
    weights: np.ndarray
    tags: Tuple[ModeTag, ...]
    label: str = ""

    def __post_init__(self):
        energies = _frozen(self.energies, float).reshape(-1)
        weights = _frozen(self.weights, float).reshape(-1)
        tags = tuple(ModeTag(t) if not isinstance(t, ModeTag) else t for t in self.tags)
        object.__setattr__(self, 'energies', energies)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'tags', tags)

        if energies.size == 0:
            raise ValueError("ModeSet needs at least one mode")
        if not (energies.size == weights.size == len(tags)):
            raise DimensionError(
                f"energies ({energies.size}), weights ({weights.size}) and "
                f"tags ({len(tags)}) must have one entry per mode"
            )
        for k, (energy, weight) in enumerate(zip(energies, weights)):
            if not np.isfinite(energy) or energy <= 0:
                raise ValueError(f"mode {k}: energy must be positive (got {energy})")
            if not np.isfinite(weight) or weight <= 0:
                raise ValueError(f"mode {k}: weight must be positive (got {weight})")

    @classmethod
    def from_rows(cls, rows: Iterable[Tuple[float, float, str]], label: str = "") -> "ModeSet":
        """Build from (energy, weight, tag) rows"""
        rows = list(rows)
        return cls(
            energies=[r[0] for r in rows],
            weights=[r[1] for r in rows],
            tags=tuple(ModeTag(r[2]) for r in rows),
            label=label,
        )

    @classmethod
    def uniform(cls, energies: Sequence[float], weight: float = 1.0,
                tag: ModeTag = ModeTag.ESSENTIAL, label: str = "") -> "ModeSet":
        """All modes share one weight and one tag"""
        return cls(
            energies=list(energies),
            weights=[weight] * len(energies),
            tags=tuple([tag] * len(energies)),
            label=label,
        )

    @property
    def count(self) -> int:
        return int(self.energies.size)

    @property
    def essential_indices(self) -> List[int]:
        return [k for k, tag in enumerate(self.tags) if tag is ModeTag.ESSENTIAL]

    def subset(self, indices: Sequence[int], label: Optional[str] = None) -> "ModeSet":
        """Modes restricted to the given indices, in the given order"""
        indices = list(indices)
        return ModeSet(
            energies=self.energies[indices],
            weights=self.weights[indices],
            tags=tuple(self.tags[k] for k in indices),
            label=self.label if label is None else label,
        )

    def to_dict(self) -> Dict:
        return {
            'label': self.label,
            'modes': [
                {'energy': float(e), 'weight': float(w), 'tag': t.value}
                for e, w, t in zip(self.energies, self.weights, self.tags)
            ],
        }


@dataclass(frozen=True, eq=False)
class CouplingFamily:
    """f_1..f_{2n}; row i-1 holds f_i as one complex amplitude per mode"""
    order: int
    vectors: np.ndarray

    def __post_init__(self):
        if int(self.order) < 1:
            raise ValueError(f"coupling order must be a positive integer (got {self.order})")
        vectors = np.array(self.vectors, dtype=complex)
        if vectors.ndim != 2 or vectors.shape[0] != 2 * self.order:
            raise DimensionError(
                f"coupling of order {self.order} needs {2 * self.order} vectors "
                f"(got shape {vectors.shape})"
            )
        vectors.setflags(write=False)
        object.__setattr__(self, 'order', int(self.order))
        object.__setattr__(self, 'vectors', vectors)

    @classmethod
    def uniform(cls, order: int, amplitudes: Sequence[complex]) -> "CouplingFamily":
        """f_1 = ... = f_{2n} = amplitudes"""
        return cls(order=order, vectors=np.tile(np.asarray(amplitudes, dtype=complex), (2 * order, 1)))

    @property
    def mode_count(self) -> int:
        return int(self.vectors.shape[1])

    def f(self, i: int) -> np.ndarray:
        """f_i with the 1-based index used throughout the model"""
        if not 1 <= i <= 2 * self.order:
            raise IndexError(f"coupling index {i} outside 1..{2 * self.order}")
        return self.vectors[i - 1]

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.vectors.imag == 0))

    def restricted(self, indices: Sequence[int]) -> "CouplingFamily":
        return CouplingFamily(order=self.order, vectors=self.vectors[:, list(indices)])

    def with_support(self, keep: Sequence[int]) -> "CouplingFamily":
        """1_A f: zero every amplitude outside the kept modes"""
        mask = np.zeros(self.mode_count, dtype=bool)
        mask[list(keep)] = True
        return CouplingFamily(order=self.order, vectors=np.where(mask[None, :], self.vectors, 0))


@dataclass(frozen=True, eq=False)
class ModelParams:
    """(eta, alpha, f, omega): the full parameterization of H_eta(alpha, f, omega)"""
    eta: float
    alpha: np.ndarray
    coupling: CouplingFamily
    modes: ModeSet

    def __post_init__(self):
        alpha = _frozen(self.alpha, float).reshape(-1)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'eta', float(self.eta))
        if alpha.size != 2 * self.coupling.order:
            raise DimensionError(
                f"alpha has {alpha.size} entries but order {self.coupling.order} "
                f"needs {2 * self.coupling.order}"
            )
        if self.coupling.mode_count != self.modes.count:
            raise DimensionError(
                f"coupling has {self.coupling.mode_count} amplitudes per vector "
                f"but the mode set has {self.modes.count} modes"
            )

    @property
    def order(self) -> int:
        return self.coupling.order

    def a(self, i: int) -> float:
        """alpha_i, 1-based"""
        return float(self.alpha[i - 1])

    def with_eta(self, eta: float) -> "ModelParams":
        return ModelParams(eta=eta, alpha=self.alpha, coupling=self.coupling, modes=self.modes)

    def with_alpha(self, alpha: Sequence[float]) -> "ModelParams":
        return ModelParams(eta=self.eta, alpha=alpha, coupling=self.coupling, modes=self.modes)

    def scaled(self, coupling_scale: float) -> "ModelParams":
        """Multiply every alpha_i by a global coupling scale"""
        return self.with_alpha(self.alpha * float(coupling_scale))

    def with_coupling_support(self, keep: Sequence[int]) -> "ModelParams":
        """f^k = 1_{A_k} f, keeping all modes in the one-boson space"""
        return ModelParams(eta=self.eta, alpha=self.alpha,
                           coupling=self.coupling.with_support(keep), modes=self.modes)

    def restricted(self, indices: Sequence[int]) -> "ModelParams":
        """Model on a subset of modes (coupling must vanish elsewhere for exactness)"""
        return ModelParams(eta=self.eta, alpha=self.alpha,
                           coupling=self.coupling.restricted(indices),
                           modes=self.modes.subset(indices))

    def payload(self) -> Dict:
        """Canonical JSON-able description (also the hashing input)"""
        return {
            'eta': self.eta,
            'alpha': [float(a) for a in self.alpha],
            'order': self.order,
            'coupling': [[[float(z.real), float(z.imag)] for z in row] for row in self.coupling.vectors],
            'modes': self.modes.to_dict(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(blob).hexdigest()


def _check_same_modes(g: np.ndarray, modes: ModeSet, name: str = "g") -> np.ndarray:
    g = np.asarray(g, dtype=complex).reshape(-1)
    if g.size != modes.count:
        raise DimensionError(f"{name} has {g.size} amplitudes but the mode set has {modes.count} modes")
    return g


def inner_product(g: Sequence[complex], h: Sequence[complex], modes: ModeSet) -> complex:
    """<g, h> = sum_k conj(g_k) h_k w_k (conjugate-linear in g)"""
    g = _check_same_modes(g, modes, "g")
    h = _check_same_modes(h, modes, "h")
    return complex(np.sum(np.conj(g) * h * modes.weights))


def infrared_norm(g: Sequence[complex], modes: ModeSet, power: float = 0.5) -> float:
    """||omega^{-power} g|| in the weighted space"""
    g = _check_same_modes(g, modes)
    return float(np.sqrt(np.sum(np.abs(g) ** 2 * modes.energies ** (-2.0 * power) * modes.weights)))


def masses(modes: ModeSet) -> Tuple[float, float]:
    """(m, m_ess); m_ess is +inf when no mode is tagged essential"""
    m = float(np.min(modes.energies))
    essential = modes.essential_indices
    m_ess = float(np.min(modes.energies[essential])) if essential else float('inf')
    return m, m_ess


def coupled_support(coupling: CouplingFamily) -> List[int]:
    """Modes on which some f_i is nonzero"""
    return [k for k in range(coupling.mode_count) if np.any(coupling.vectors[:, k] != 0)]
