"""HSP model pieces: data matrix, hyperparameters, sampler state, Normal kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import ConsistencyError, DegenerateDataError, InvalidArgumentError
from .partition import Partition, Permutation, canonicalize

DEFAULT_D0 = 7.25
DEFAULT_E0 = 1.0


@dataclass
class DataMatrix:
    """Conditions in rows (I), subjects in columns (J)."""

    values: np.ndarray
    condition_names: list[str] = None
    subject_names: list[str] = None
    standardized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise InvalidArgumentError(f"data must be a non-empty matrix, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise DegenerateDataError("data contain non-finite values")
        I, J = self.values.shape
        if self.condition_names is None:
            self.condition_names = [f"condition_{i + 1}" for i in range(I)]
        if self.subject_names is None:
            self.subject_names = [f"subject_{j + 1}" for j in range(J)]
        self.condition_names = [str(v) for v in self.condition_names]
        self.subject_names = [str(v) for v in self.subject_names]
        if len(self.condition_names) != I or len(self.subject_names) != J:
            raise InvalidArgumentError("name vectors do not match the matrix shape")

    @property
    def n_conditions(self) -> int:
        return self.values.shape[0]

    @property
    def n_subjects(self) -> int:
        return self.values.shape[1]


def standardize(data: DataMatrix) -> DataMatrix:
    """Zero mean and unit sample variance within each subject's column."""
    y = data.values
    for j in range(y.shape[1]):
        if np.ptp(y[:, j]) == 0:
            raise DegenerateDataError(
                f"subject {data.subject_names[j]!r} has a constant column; cannot standardize"
            )
    if y.shape[0] < 2:
        raise DegenerateDataError("need at least two conditions to standardize")
    z = (y - y.mean(axis=0)) / y.std(axis=0, ddof=1)
    return DataMatrix(z, list(data.condition_names), list(data.subject_names), standardized=True)


@dataclass(frozen=True)
class ClusterParams:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidArgumentError("sigma2 must be positive")


def log_likelihood_point(y: float, params: ClusterParams) -> float:
    d = y - params.mu
    return -0.5 * math.log(2 * math.pi * params.sigma2) - 0.5 * d * d / params.sigma2


def _vector(v, n, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise InvalidArgumentError(f"{name} must be a scalar or have length {n}")
    return arr


@dataclass
class Hyperparams:
    """Shrinkage strengths, CRP masses, cluster-parameter priors and base partitions.

    Per-subject prior vectors (a0, b0, d0, e0) accept scalars.
    """

    c0: Partition
    nu0: Partition
    tau: float = 0.0
    rho: float = 0.0
    lam: float = 0.0
    alpha0: float = 1.0
    beta0: float = 1.0
    beta: float = 1.0
    a0: np.ndarray = 0.0
    b0: np.ndarray = 1.0
    d0: np.ndarray = DEFAULT_D0
    e0: np.ndarray = DEFAULT_E0

    def __post_init__(self):
        self.c0 = canonicalize(self.c0)
        self.nu0 = canonicalize(self.nu0)
        J = self.c0.n_items
        self.a0 = _vector(self.a0, J, "a0")
        self.b0 = _vector(self.b0, J, "b0")
        self.d0 = _vector(self.d0, J, "d0")
        self.e0 = _vector(self.e0, J, "e0")
        for name in ("tau", "rho", "lam"):
            v = float(getattr(self, name))
            if not (v >= 0 and math.isfinite(v)):
                raise InvalidArgumentError(f"{name} must be finite and non-negative")
            setattr(self, name, v)
        for name in ("alpha0", "beta0", "beta"):
            v = float(getattr(self, name))
            if not v > 0:
                raise InvalidArgumentError(f"{name} must be positive")
            setattr(self, name, v)
        if np.any(self.b0 <= 0) or np.any(self.e0 <= 0):
            raise InvalidArgumentError("b0 and e0 must be positive")
        if np.any(self.d0 <= 1):
            raise InvalidArgumentError("d0 must exceed 1 so the prior variance mean is finite")
        if not np.all(np.isfinite(self.a0)):
            raise InvalidArgumentError("a0 must be finite")

    @property
    def n_subjects(self) -> int:
        return self.c0.n_items

    @property
    def n_conditions(self) -> int:
        return self.nu0.n_items

    @classmethod
    def for_data(cls, data: DataMatrix, c0=None, nu0=None, **kw) -> "Hyperparams":
        """Defaults tied to the data: a0, b0 are each column's sample mean and variance."""
        I, J = data.values.shape
        if c0 is None:
            c0 = [1] * J
        if nu0 is None:
            nu0 = [1] * I
        if "a0" not in kw:
            kw["a0"] = data.values.mean(axis=0)
        if "b0" not in kw:
            if I < 2:
                raise DegenerateDataError("cannot estimate b0 from a single condition")
            b0 = data.values.var(axis=0, ddof=1)
            if np.any(b0 <= 0):
                bad = data.subject_names[int(np.argmin(b0))]
                raise DegenerateDataError(f"subject {bad!r} has zero variance; set b0 explicitly")
            kw["b0"] = b0
        return cls(c0=c0, nu0=nu0, **kw)

    def with_shrinkage(self, **kw) -> "Hyperparams":
        from dataclasses import replace

        return replace(self, **kw)


def sample_theta_prior(j: int, h: Hyperparams, rng: np.random.Generator) -> ClusterParams:
    mu = rng.normal(h.a0[j], math.sqrt(h.b0[j]))
    sigma2 = 1.0 / rng.gamma(h.d0[j], 1.0 / h.e0[j])
    return ClusterParams(float(mu), float(sigma2))


def mu_full_conditional(ys: Sequence[float], sigma2: float, a0: float, b0: float):
    """Mean and variance of mu given sigma2 and the cluster's observations."""
    ys = np.asarray(ys, dtype=float)
    prec = 1.0 / b0 + len(ys) / sigma2
    mean = (a0 / b0 + ys.sum() / sigma2) / prec
    return mean, 1.0 / prec


def sigma2_full_conditional(ys: Sequence[float], mu: float, d0: float, e0: float):
    """Inverse-Gamma (shape, scale) of sigma2 given mu and the observations."""
    ys = np.asarray(ys, dtype=float)
    return d0 + 0.5 * len(ys), e0 + 0.5 * float(((ys - mu) ** 2).sum())


@dataclass
class HspState:
    """Dense 0-based array form of the sampler state for J subjects, I conditions.

    Row ``k`` of ``nu_star``/``eps_star`` is valid for ``k < n_groups``;
    ``mu[j, l]``/``sigma2[j, l]`` are valid for ``l < n_clusters[j]``.
    """

    c: np.ndarray
    n_groups: int
    zeta: np.ndarray
    nu_star: np.ndarray
    eps_star: np.ndarray
    pi: np.ndarray
    n_clusters: np.ndarray
    delta: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    accept: np.ndarray = field(default_factory=lambda: np.zeros(6, np.int64))

    @property
    def n_subjects(self) -> int:
        return self.pi.shape[0]

    @property
    def n_conditions(self) -> int:
        return self.pi.shape[1]

    @property
    def subject_partition(self) -> Partition:
        return Partition(tuple(self.c + 1))

    @property
    def subject_permutation(self) -> Permutation:
        return Permutation(tuple(self.zeta))

    def condition_partition(self, j: int) -> Partition:
        return Partition(tuple(self.pi[j] + 1))

    def condition_permutation(self, j: int) -> Permutation:
        return Permutation(tuple(self.delta[j]))

    def base_partition(self, k: int) -> Partition:
        if not 0 <= k < self.n_groups:
            raise IndexError(k)
        return Partition(tuple(self.nu_star[k] + 1))

    def base_permutation(self, k: int) -> Permutation:
        if not 0 <= k < self.n_groups:
            raise IndexError(k)
        return Permutation(tuple(self.eps_star[k]))

    def theta(self, j: int) -> list[ClusterParams]:
        return [
            ClusterParams(float(self.mu[j, l]), float(self.sigma2[j, l]))
            for l in range(self.n_clusters[j])
        ]

    def copy(self) -> "HspState":
        return HspState(
            self.c.copy(), int(self.n_groups), self.zeta.copy(), self.nu_star.copy(),
            self.eps_star.copy(), self.pi.copy(), self.n_clusters.copy(), self.delta.copy(),
            self.mu.copy(), self.sigma2.copy(), self.accept.copy(),
        )

    def check(self) -> None:
        """Raise ConsistencyError unless every partition is canonical and sized right."""
        J, I = self.pi.shape

        def canonical(labels):
            top = -1
            for v in labels:
                if v > top + 1 or v < 0:
                    return False
                top = max(top, v)
            return True

        def is_perm(p):
            return sorted(p.tolist()) == list(range(len(p)))

        if not canonical(self.c) or self.c.max() + 1 != self.n_groups:
            raise ConsistencyError("subject partition not canonical or group count stale")
        if not is_perm(self.zeta):
            raise ConsistencyError("zeta is not a permutation")
        for k in range(self.n_groups):
            if not canonical(self.nu_star[k]) or not is_perm(self.eps_star[k]):
                raise ConsistencyError(f"base partition {k} malformed")
        for j in range(J):
            if not canonical(self.pi[j]) or self.pi[j].max() + 1 != self.n_clusters[j]:
                raise ConsistencyError(f"condition partition of subject {j} malformed")
            if not is_perm(self.delta[j]):
                raise ConsistencyError(f"delta of subject {j} is not a permutation")
            if np.any(self.sigma2[j, : self.n_clusters[j]] <= 0):
                raise ConsistencyError(f"non-positive sigma2 for subject {j}")


@dataclass
class PreparedHyper:
    """Kernel-ready arrays derived from Hyperparams (vectors, lookup tables, flags)."""

    c0: np.ndarray
    nu0: np.ndarray
    tau: np.ndarray
    rho: np.ndarray
    lam: np.ndarray
    ttab: np.ndarray
    rtab: np.ndarray
    ltab: np.ndarray
    alpha0: float
    beta0: float
    beta: float
    a0: np.ndarray
    b0: np.ndarray
    d0: np.ndarray
    e0: np.ndarray
    workspace: tuple

    @classmethod
    def build(cls, h: Hyperparams) -> "PreparedHyper":
        I, J = h.n_conditions, h.n_subjects
        tau = np.full(J, h.tau)
        rho = np.full(I, h.rho)
        lam = np.full(I, h.lam)
        return cls(
            h.c0.as_array(zero_based=True), h.nu0.as_array(zero_based=True),
            tau, rho, lam,
            K.make_table(tau, J), K.make_table(rho, I), K.make_table(lam, I),
            h.alpha0, h.beta0, h.beta,
            h.a0.copy(), h.b0.copy(), h.d0.copy(), h.e0.copy(),
            K.make_workspace(max(I, J)),
        )


def update_theta(state: HspState, data: DataMatrix | None, h: Hyperparams,
                 rng: np.random.Generator | None = None, prior_only: bool = False):
    """Redraw every cluster's (mu, sigma2) from its full conditionals.

    ``prior_only`` drops the likelihood, so both conditionals reduce to the prior.
    Returns the per-subject lists of ClusterParams.
    """
    if rng is not None:
        K.seed(int(rng.integers(0, 2**32 - 1)))
    J, I = state.pi.shape
    y = np.zeros((I, J)) if data is None else data.values
    if y.shape != (I, J):
        raise InvalidArgumentError(f"data shape {y.shape} does not match state ({I}, {J})")
    ok = K.update_theta(y, state.pi, state.n_clusters, state.mu, state.sigma2,
                        h.a0, h.b0, h.d0, h.e0, prior_only or data is None)
    if not ok:
        raise ConsistencyError("empty condition cluster encountered during theta update")
    return [state.theta(j) for j in range(J)]
