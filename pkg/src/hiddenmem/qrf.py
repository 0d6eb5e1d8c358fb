"""Memoryless quantum models and the search for one that fits a family.

A memoryless model is an initial system state and one independent channel
per interval. Probabilities follow the quantum regression formula: alternate
channels with sharp projections at probed times and do nothing at the others.
"""

from __future__ import annotations

import enum
import functools
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.optimize

from . import numerics as nx
from .optimize import nelder_mead
from .quantum import STATE_ATOL, KrausChannel, check_state, random_channel, random_state
from .stats import DEFAULT_TOL, AnalysisReport, JointDistribution, StatisticsFamily, Verdict, witness_hidden_memory

MAX_FIT_DIM = 4
_FD_STEP = float(np.sqrt(np.finfo(float).eps))


@dataclass(frozen=True)
class MemorylessQuantumModel:
    rho1: np.ndarray
    channels: tuple[KrausChannel, ...]

    def __post_init__(self) -> None:
        rho = check_state(self.rho1)
        object.__setattr__(self, "rho1", rho)
        object.__setattr__(self, "channels", tuple(self.channels))
        d = rho.shape[0]
        for j, ch in enumerate(self.channels):
            if ch.dim_in != d or ch.dim_out != d:
                raise ValueError(f"channel {j} maps {ch.dim_in}->{ch.dim_out}, expected {d}->{d}")

    @property
    def d(self) -> int:
        return self.rho1.shape[0]

    @property
    def n_times(self) -> int:
        return len(self.channels) + 1


def superoperator(ch: KrausChannel) -> np.ndarray:
    """Matrix ``S`` with ``vec(L(rho)) = S vec(rho)`` for row-major ``vec``."""
    k = ch.stacked()
    d_out, d_in = ch.dim_out, ch.dim_in
    return np.einsum("kab,kcd->acbd", k, k.conj()).reshape(d_out * d_out, d_in * d_in)


def transition_matrix(ch: KrausChannel) -> np.ndarray:
    """``T[y, x] = <y| L(|x><x|) |y>``: the classical shadow of a channel."""
    k = ch.stacked()
    return np.einsum("kyx->yx", np.abs(k) ** 2)


def _leaf_probs(rho1: np.ndarray, superops: list[np.ndarray]) -> np.ndarray:
    """Probabilities of every (pattern, outcomes) leaf in one sweep.

    At each time every branch splits into ``d + 1`` children: child 0 is the
    do-nothing branch, child ``1 + x`` the projection on ``|x>``. The flat leaf
    index is the base-``(d+1)`` number of those choices, first time slowest.
    """
    d = rho1.shape[0]
    sups = np.stack(superops)[None] if superops else np.zeros((1, 0, d * d, d * d), dtype=np.complex128)
    return _leaf_probs_batch(rho1[None], sups)[0]


def _leaf_probs_batch(rho1: np.ndarray, superops: np.ndarray) -> np.ndarray:
    """Batched :func:`_leaf_probs`: ``rho1`` is ``(B, d, d)``, ``superops`` ``(B, n-1, d^2, d^2)``."""
    batch, d = rho1.shape[0], rho1.shape[1]
    diag = np.arange(d) * (d + 1)
    v = rho1.reshape(batch, 1, d * d).astype(np.complex128)
    n_steps = superops.shape[1]
    for t in range(n_steps + 1):
        nb = v.shape[1]
        nxt = np.zeros((batch, nb, d + 1, d * d), dtype=np.complex128)
        nxt[:, :, 0] = v
        nxt[:, :, 1 + np.arange(d), diag] = v[:, :, diag]
        v = nxt.reshape(batch, nb * (d + 1), d * d)
        if t < n_steps:
            v = v @ superops[:, t].transpose(0, 2, 1)
    return v[:, :, diag].sum(axis=2).real


@functools.lru_cache(maxsize=None)
def _leaf_index(n_times: int, d: int) -> dict[int, np.ndarray]:
    """Leaf positions of each pattern's outcomes, in the distribution's order."""
    out = {}
    weights = (d + 1) ** np.arange(n_times - 1, -1, -1)
    for mask in range(1 << n_times):
        choices = [range(1, d + 1) if mask >> t & 1 else (0,) for t in range(n_times)]
        out[mask] = np.array([int(np.dot(c, weights)) for c in itertools.product(*choices)], dtype=np.int64)
    return out


def family_to_leaves(fam: StatisticsFamily) -> np.ndarray:
    fam.require_complete()
    idx = _leaf_index(fam.n_times, fam.outcome_dim)
    leaves = np.zeros((fam.outcome_dim + 1) ** fam.n_times)
    for mask, dist in fam.table.items():
        leaves[idx[mask]] = dist.probs.ravel()
    return leaves


def leaves_to_family(leaves: np.ndarray, n_times: int, d: int) -> StatisticsFamily:
    idx = _leaf_index(n_times, d)
    table = {}
    for mask, where in idx.items():
        k = bin(mask).count("1")
        table[mask] = JointDistribution(n_times, mask, d, leaves[where].reshape((d,) * k))
    return StatisticsFamily(n_times, d, table)


def qrf_family(model: MemorylessQuantumModel) -> StatisticsFamily:
    """Statistics of every probing pattern under the regression formula."""
    leaves = _leaf_probs(model.rho1, [superoperator(ch) for ch in model.channels])
    return leaves_to_family(leaves, model.n_times, model.d)


def random_memoryless_model(rng: np.random.Generator, d: int = 2, n_times: int = 4,
                            n_kraus: int | None = None) -> MemorylessQuantumModel:
    """Random state and channels from Haar-random Stinespring isometries."""
    return MemorylessQuantumModel(
        random_state(rng, d),
        tuple(random_channel(rng, d, n_kraus) for _ in range(n_times - 1)),
    )


class StinespringParameterization:
    """Real parameter vector -> memoryless model, valid by construction.

    The initial state is ``G G^dagger / tr(G G^dagger)`` for a free complex
    ``d x d`` matrix ``G``. Each channel is the first block column ``V`` of
    ``exp(A)`` with ``A`` anti-Hermitian on dimension ``d * ancilla``; the
    Kraus operators are the ``d x d`` blocks of ``V``. Only the blocks of
    ``A`` that touch the first block column are free: an anti-Hermitian
    ``d x d`` corner and an arbitrary block below it (mirrored above). That
    reaches every isometry and matches the isometry manifold's dimension.

    Evaluation is vectorised over a leading batch axis so finite-difference
    Jacobians cost one call.
    """

    def __init__(self, d: int, n_times: int, ancilla_dim: int):
        self.d, self.n_times, self.ancilla_dim = d, n_times, ancilla_dim
        self.big = d * ancilla_dim
        self.n_state = 2 * d * d
        self.n_channel = d * d + 2 * d * d * (ancilla_dim - 1)
        self.size = self.n_state + (n_times - 1) * self.n_channel
        self._gen_map = self._generator_map()

    def _generator_map(self) -> np.ndarray:
        """Complex ``(big*big, n_channel)`` matrix taking parameters to ``vec(A)``."""
        d, big = self.d, self.big
        cols = []

        def unit(entries: list[tuple[int, int, complex]]) -> np.ndarray:
            a = np.zeros((big, big), dtype=np.complex128)
            for r, c, v in entries:
                a[r, c] += v
            return a.ravel()

        for i in range(d):
            cols.append(unit([(i, i, 1j)]))
        upper = [(i, j) for i in range(d) for j in range(i + 1, d)]
        for i, j in upper:  # real part of the Hermitian off-diagonal
            cols.append(unit([(i, j, 1j), (j, i, 1j)]))
        for i, j in upper:  # imaginary part
            cols.append(unit([(i, j, -1.0), (j, i, 1.0)]))
        below = [(r, c) for r in range(d, big) for c in range(d)]
        for r, c in below:
            cols.append(unit([(r, c, 1.0), (c, r, -1.0)]))
        for r, c in below:
            cols.append(unit([(r, c, 1j), (c, r, 1j)]))
        return np.stack(cols, axis=1)

    def _split(self, thetas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return thetas[:, : self.n_state], thetas[:, self.n_state:].reshape(len(thetas), self.n_times - 1, self.n_channel)

    def states(self, thetas: np.ndarray) -> np.ndarray:
        d = self.d
        g_par, _ = self._split(np.atleast_2d(thetas))
        g = (g_par[:, : d * d] + 1j * g_par[:, d * d:]).reshape(-1, d, d)
        rho = g @ g.conj().transpose(0, 2, 1)
        return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]

    def generators(self, thetas: np.ndarray) -> np.ndarray:
        _, ch = self._split(np.atleast_2d(thetas))
        return (ch @ self._gen_map.T).reshape(*ch.shape[:2], self.big, self.big)

    def isometries(self, thetas: np.ndarray) -> np.ndarray:
        """Shape ``(batch, n_times - 1, big, d)``."""
        return nx.matrix_exp_batch(self.generators(thetas))[..., : self.d]

    def kraus(self, v: np.ndarray) -> np.ndarray:
        return v.reshape(*v.shape[:-2], self.ancilla_dim, self.d, self.d)

    def leaf_probs(self, thetas: np.ndarray) -> np.ndarray:
        """Leaf probabilities for one parameter vector or a batch of them."""
        single = np.ndim(thetas) == 1
        thetas = np.atleast_2d(thetas)
        d = self.d
        k = self.kraus(self.isometries(thetas))
        sups = np.einsum("bjkac,bjkde->bjadce", k, k.conj()).reshape(len(thetas), self.n_times - 1, d * d, d * d)
        out = _leaf_probs_batch(self.states(thetas), sups)
        return out[0] if single else out

    def model(self, theta: np.ndarray) -> MemorylessQuantumModel:
        k = self.kraus(self.isometries(theta)[0])
        channels = tuple(KrausChannel(tuple(kj)) for kj in k)
        return MemorylessQuantumModel(self.states(theta)[0], channels)


@dataclass
class FitConfig:
    n_starts: int = 32
    max_iters: int = 5000
    seed: int = 0
    ancilla_dim: int | None = None
    convergence_tol: float = 1e-10
    loss_floor: float = 1e-12
    polish: bool = True
    polish_max_nfev: int = 200
    threads: int = 1

    def __post_init__(self) -> None:
        for name in ("n_starts", "max_iters", "convergence_tol", "loss_floor", "threads", "polish_max_nfev"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.ancilla_dim is not None and self.ancilla_dim <= 0:
            raise ValueError("ancilla_dim must be positive")


@dataclass
class FitResult:
    model: MemorylessQuantumModel
    residual: float
    per_start_losses: list[float]
    best_start: int


def _fit_one(param: StinespringParameterization, target: np.ndarray, cfg: FitConfig,
             start: int) -> tuple[float, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, start]))
    x0 = rng.normal(size=param.size)

    def residuals(theta: np.ndarray) -> np.ndarray:
        return param.leaf_probs(theta) - target

    def loss(theta: np.ndarray) -> float:
        r = residuals(theta)
        return float(r @ r)

    def jacobian(theta: np.ndarray) -> np.ndarray:
        h = _FD_STEP * np.maximum(1.0, np.abs(theta))
        shifted = theta + np.diag(h)
        return (param.leaf_probs(shifted) - param.leaf_probs(theta)).T / h

    res = nelder_mead(loss, x0, rng, max_iters=cfg.max_iters, tol=cfg.convergence_tol)
    x, fx = res.x, res.fun
    if cfg.polish and fx > cfg.loss_floor:
        # trust-region least squares; the Jacobian is a forward difference
        ls = scipy.optimize.least_squares(residuals, x, method="trf", jac=jacobian,
                                          xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                          max_nfev=cfg.polish_max_nfev)
        if loss(ls.x) < fx:
            x, fx = ls.x, loss(ls.x)
    return fx, x


def fit_memoryless(target: StatisticsFamily, cfg: FitConfig | None = None) -> FitResult:
    """Multistart search for a memoryless model reproducing ``target``.

    The loss is the squared difference summed over every pattern and outcome,
    all patterns weighted equally. Each start draws its initial point from a
    generator seeded by ``(cfg.seed, start)``, runs simplex descent and, when
    enabled, a least-squares polish. The best start wins, ties going to the
    lowest index.
    """
    cfg = cfg or FitConfig()
    d = target.outcome_dim
    if d > MAX_FIT_DIM:
        raise ValueError(f"fitting supports d <= {MAX_FIT_DIM}, family has outcome_dim={d}")
    leaves = family_to_leaves(target)
    param = StinespringParameterization(d, target.n_times, cfg.ancilla_dim or d * d)
    run = functools.partial(_fit_one, param, leaves, cfg)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            results = list(pool.map(run, range(cfg.n_starts)))
    else:
        results = [run(s) for s in range(cfg.n_starts)]
    losses = [fx for fx, _ in results]
    best = int(np.argmin(losses))
    model = param.model(results[best][1])
    _assert_valid(model)
    return FitResult(model, losses[best], losses, best)


def _assert_valid(model: MemorylessQuantumModel) -> None:
    check_state(model.rho1)
    for ch in model.channels:
        gram = sum(k.conj().T @ k for k in ch.kraus_ops)
        assert np.allclose(gram, np.eye(model.d), atol=STATE_ATOL), "fitted channel is not trace preserving"


class Conclusion(str, enum.Enum):
    MODEL_FOUND = "MODEL_FOUND"
    NO_MODEL_WITNESSED = "NO_MODEL_WITNESSED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class CertifyReport:
    best_model: MemorylessQuantumModel
    residual: float
    per_start_losses: list[float]
    witness: AnalysisReport
    conclusion: Conclusion
    config: FitConfig = field(default_factory=FitConfig)

    def to_dict(self) -> dict:
        from .io import model_to_json

        return {
            "conclusion": self.conclusion.value,
            "residual": self.residual,
            "per_start_losses": list(self.per_start_losses),
            "witness": self.witness.to_dict(),
            "best_model": model_to_json(self.best_model),
            "config": asdict(self.config),
        }


def certify(target: StatisticsFamily, cfg: FitConfig | None = None, tol: float = DEFAULT_TOL) -> CertifyReport:
    """Witness check plus fitter run.

    A firing witness settles the question (the fit residual is reported as
    corroboration). Otherwise the fit decides between a found model and an
    inconclusive result.
    """
    cfg = cfg or FitConfig()
    witness = witness_hidden_memory(target, tol)
    fit = fit_memoryless(target, cfg)
    if witness.verdict is not Verdict.CONSISTENT_WITH_MEMORYLESS:
        conclusion = Conclusion.NO_MODEL_WITNESSED
    elif fit.residual < cfg.loss_floor:
        conclusion = Conclusion.MODEL_FOUND
    else:
        conclusion = Conclusion.INCONCLUSIVE
    return CertifyReport(fit.model, fit.residual, fit.per_start_losses, witness, conclusion, cfg)
