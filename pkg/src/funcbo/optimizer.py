"""Optimiser loops: subspace search, line search on Bernstein weights,
and random search, all sharing one evaluation protocol.

Every optimiser is a stepwise ask/tell engine: ``ask`` produces the next
function to evaluate, ``tell`` records the observed value.  The runner
functions drive an engine against an in-process objective; the bench
module drives the same engines through a state file, so simulated and
external experiments share a single code path.

The subspace engine alternates an outer loop that draws a fresh random
subspace (bias = best function found so far, basis = GP sample paths)
with an inner GP-UCB loop over the subspace coordinates.  The model of
the objective is conditioned on every observation made so far, across
all subspaces.

Determinism: all draws come from two streams derived from the config
seed, one for optimiser decisions and one for observation noise, so an
external ask/tell session reproduces an in-process run exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Protocol

import numpy as np

from . import acquisition, gp, kernels
from .acquisition import AcqSearchConfig, UcbSchedule
from .errors import ConfigError, InputError, NumericalError, ProtocolError
from .gridfn import GridFunction, GridSpec, grid_coordinates
from .kernels import FunctionalKernelSpec, ScalarKernelSpec

BERNSTEIN_DEGREE = 10
ALGORITHMS = ("s3bfo", "linebo_bernstein", "fixed_subspace", "random_search")
TERMINATIONS = ("budget", "regret")

_REGRET_SEARCH_SEED = 0x5EED


@dataclass(frozen=True, eq=False)
class Subspace:
    """Affine search set bias + span(basis) for one outer iteration."""

    s: int
    bias: GridFunction
    basis: tuple[GridFunction, ...]

    def __post_init__(self):
        if not self.basis:
            raise InputError("subspace needs at least one basis function")
        for h in self.basis:
            if h.spec != self.bias.spec:
                raise InputError("subspace functions must share one grid")

    @property
    def d(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class OptConfig:
    """Everything one optimiser run needs; mirrors the flat config keys."""

    grid: GridSpec = GridSpec(1, 100)
    kappa: ScalarKernelSpec = ScalarKernelSpec("se", 0.3)
    k_kind: str = "se"
    k_metric: str = "l2grid"
    k_lengthscale: float | str = "mle"
    noise_sigma: float = 0.01
    d: int = 1
    S: int = 4
    T: int = 30
    n_init: int = 5
    termination: str = "budget"
    epsilon: float = 0.01
    seed: int = 0
    acq_delta: float = 0.1
    acq_restarts: int = 8
    acq_local_steps: int = 40
    acq_lambda_box: float = 4.0
    l_max: float = 10.0
    mle_grid_min: float = 0.01
    mle_grid_max: float = 10.0
    mle_grid_points: int = 17

    def __post_init__(self):
        for name in ("d", "S", "T", "n_init"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.termination not in TERMINATIONS:
            raise ConfigError(f"unknown termination {self.termination!r}")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.k_kind not in kernels.DISTANCE_KINDS:
            raise ConfigError(f"K.kind must be distance-based, got {self.k_kind!r}")
        if self.k_metric not in kernels.METRICS:
            raise ConfigError(f"unknown K.metric {self.k_metric!r}")
        if self.k_lengthscale != "mle" and not (
            isinstance(self.k_lengthscale, (int, float)) and self.k_lengthscale > 0
        ):
            raise ConfigError("K.lengthscale must be positive or 'mle'")
        if not self.noise_sigma > 0:
            raise ConfigError("noise.sigma must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if not (0 < self.mle_grid_min <= self.mle_grid_max):
            raise ConfigError("mle grid bounds must satisfy 0 < min <= max")
        if self.mle_grid_points < 1:
            raise ConfigError("mle.grid_points must be >= 1")

    @property
    def noise_sq(self) -> float:
        return self.noise_sigma**2

    @property
    def budget(self) -> int:
        """Evaluations per run when every inner loop uses its full budget."""
        return self.S * (self.n_init + self.T)


@dataclass(frozen=True)
class RunRecord:
    """One objective evaluation; t is -1 for initial-design points."""

    eval_index: int
    s: int
    t: int
    lam: tuple[float, ...]
    y: float
    best_y: float
    aux: dict = field(default_factory=dict)


class Objective(Protocol):
    """A noisy functional; evaluate may draw from the supplied rng.

    Implementations may also provide ``aux(g) -> dict[str, float]`` with
    noiseless diagnostics that get attached to the run records.
    """

    def evaluate(self, g: GridFunction, rng) -> float: ...


def rng_streams(seed: int):
    """Two independent generators derived from one seed: (decisions, noise)."""
    dec, noise = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(dec), np.random.default_rng(noise)


class _CountingRng:
    """Forwards draws to a Generator while counting values drawn; the
    count is the replayable rng cursor stored in ask/tell state files."""

    def __init__(self, gen):
        self._gen = gen
        self.draws = 0

    def standard_normal(self, size=None):
        self.draws += 1 if size is None else int(np.prod(size))
        return self._gen.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        self.draws += 1 if size is None else int(np.prod(size))
        return self._gen.uniform(low, high, size)


def bernstein_matrix(degree: int, x: np.ndarray) -> np.ndarray:
    """Rows of Bernstein basis polynomials B_{k,degree} evaluated at x."""
    x = np.asarray(x, dtype=float)
    rows = [
        math.comb(degree, k) * x**k * (1.0 - x) ** (degree - k)
        for k in range(degree + 1)
    ]
    return np.array(rows)


def simple_regret_err(
    model: gp.GPModel,
    subspace: Subspace,
    incumbent: GridFunction,
    search: AcqSearchConfig | None = None,
    rng=None,
) -> float:
    """Simple-regret certificate for the incumbent on a subspace: the
    maximum of (mean + sd) over the subspace minus (mean - sd) at the
    incumbent.  With high probability the incumbent is within err of the
    subspace optimum, so values below epsilon justify ending the inner
    loop of a maximisation run.

    The inner maximisation reuses the acquisition multistart machinery;
    its restart seeds come from a fixed internal stream unless an rng is
    given, so the test does not perturb an optimiser's draw sequence.
    """
    if model.n == 0:
        raise InputError("simple regret test needs a non-empty model")
    if search is None:
        search = AcqSearchConfig()
    if rng is None:
        rng = np.random.default_rng(_REGRET_SEARCH_SEED)
    mean, var = gp.posterior(model, incumbent)
    _, _, ucb_max = acquisition.maximise_ucb(model, subspace, search, rng)
    return float(ucb_max - (mean - math.sqrt(var)))


# --- engines ------------------------------------------------------------


class _EngineBase:
    """Trace and incumbent bookkeeping shared by all optimisers."""

    def __init__(self, cfg: OptConfig, rng=None):
        self.cfg = cfg
        self._rng = _CountingRng(rng if rng is not None else rng_streams(cfg.seed)[0])
        self._trace: list[RunRecord] = []
        self._best_values: np.ndarray | None = None
        self._best_y = 0.0  # virtual incumbent value; real observations win ties
        self.pending = None  # (kind, s, t, lam, g_values)
        self._defer_model = False

    @property
    def trace(self) -> list[RunRecord]:
        return self._trace

    @property
    def draw_count(self) -> int:
        return self._rng.draws

    @property
    def best(self) -> tuple[GridFunction, float]:
        """Best real observation so far; the zero function before any."""
        if self._best_values is None:
            return GridFunction(self.cfg.grid, np.zeros(self.cfg.grid.size)), 0.0
        return GridFunction(self.cfg.grid, self._best_values), self._best_y

    def _incumbent_values(self) -> np.ndarray:
        if self._best_values is None:
            return np.zeros(self.cfg.grid.size)
        return np.array(self._best_values)

    def _record(self, kind, s, t, lam, y, aux) -> RunRecord:
        best_y = y if not self._trace else max(self._trace[-1].best_y, y)
        rec = RunRecord(
            eval_index=len(self._trace),
            s=s,
            t=-1 if kind == "init" else t,
            lam=tuple(float(v) for v in np.atleast_1d(lam)),
            y=float(y),
            best_y=float(best_y),
            aux=dict(aux or {}),
        )
        self._trace.append(rec)
        return rec

    def _update_best(self, g_values: np.ndarray, y: float) -> bool:
        if self._best_values is None or y > self._best_y:
            self._best_values = np.array(g_values)
            self._best_y = float(y)
            return True
        return False

    def _require_pending(self):
        if self.pending is None:
            raise ProtocolError("no pending suggestion; call ask first")

    def _require_no_pending(self):
        if self.pending is not None:
            raise ProtocolError("a suggestion is pending; call tell first")

    def replay(self, records, pending_desc=None):
        """Rebuild internal state from stored records (see bench state files).

        Deterministic replay: every rng draw the original run made is
        re-drawn in order, and stored values are checked against the
        replayed ones so a corrupted or out-of-date state file fails
        loudly instead of diverging.
        """
        self._defer_model = self._can_defer_model()
        for rec in records:
            kind = "init" if rec.t < 0 else "inner"
            self._restore_step(kind, rec.s, rec.t, np.asarray(rec.lam))
            if self.pending[3].shape != (len(rec.lam),) or not np.array_equal(
                self.pending[3], np.asarray(rec.lam)
            ):
                raise ProtocolError(
                    f"state replay diverged at evaluation {rec.eval_index}"
                )
            new = self.tell(rec.y, aux=rec.aux)
            if (new.s, new.t, new.best_y) != (rec.s, rec.t, rec.best_y):
                raise ProtocolError(
                    f"state replay bookkeeping mismatch at evaluation {rec.eval_index}"
                )
        self._defer_model = False
        self._rebuild_deferred()
        if pending_desc is not None:
            kind, s, t, lam = pending_desc
            self._restore_step(kind, s, t, np.asarray(lam))
            if not np.array_equal(self.pending[3], np.asarray(lam)):
                raise ProtocolError("state replay diverged at the pending suggestion")

    # engine-specific hooks
    def _can_defer_model(self) -> bool:
        return False

    def _rebuild_deferred(self):
        pass

    def _restore_step(self, kind, s, t, lam):
        raise NotImplementedError


class SubspaceSearchEngine(_EngineBase):
    """GP-UCB over a sequence of random function subspaces.

    Per outer iteration: bias at the incumbent, draw `d` basis sample
    paths from the solution prior, evaluate `n_init` coordinate draws
    from N(0, I), then run the inner acquisition loop until its budget
    or the simple regret test ends it.
    """

    def __init__(self, cfg: OptConfig, rng=None):
        super().__init__(cfg, rng)
        self.s = 0
        self.phase = "init"
        self.i_init = 0
        self.t = 0
        self.subspace: Subspace | None = None
        self.finished = False
        self._obs: list[gp.Observation] = []
        self._outer_best: tuple[np.ndarray, float] | None = None
        self._err_cache: dict[tuple[int, int], float] = {}
        self._mle = cfg.k_lengthscale == "mle"
        self._mle_grid = tuple(
            np.geomspace(cfg.mle_grid_min, cfg.mle_grid_max, cfg.mle_grid_points)
        )
        gamma0 = (
            math.sqrt(cfg.mle_grid_min * cfg.mle_grid_max)
            if self._mle
            else float(cfg.k_lengthscale)
        )
        base = ScalarKernelSpec(cfg.k_kind, gamma0)
        gram = (
            kernels.scalar_gram(cfg.kappa, grid_coordinates(cfg.grid))
            if cfg.k_metric == "rkhs"
            else None
        )
        self._template = FunctionalKernelSpec(base, cfg.k_metric, gram)
        self.model = gp.empty_model(self._template, cfg.noise_sq)
        self._search = AcqSearchConfig(
            cfg.acq_restarts, cfg.acq_local_steps, cfg.acq_lambda_box, cfg.l_max
        )
        self._schedule = UcbSchedule(cfg.acq_delta, cfg.d)

    @property
    def done(self) -> bool:
        self._advance()
        return self.finished

    def _advance(self):
        """Resolve phase transitions; draws nothing, so safe to re-enter."""
        if self.finished:
            return
        if self.phase == "init" and self.subspace is not None:
            if self.i_init >= self.cfg.n_init:
                self.phase = "inner"
                self.t = 0
        while self.phase == "inner" and self._inner_done():
            self.s += 1
            self.subspace = None
            self.phase = "init"
            self.i_init = 0
            self.t = 0
            self._outer_best = None
            if self.s >= self.cfg.S:
                self.finished = True
                return

    def _inner_done(self) -> bool:
        if self.t >= self.cfg.T:
            return True
        if self.cfg.termination == "regret":
            key = (self.s, self.t)
            if key not in self._err_cache:
                values, _ = self._outer_best
                self._err_cache[key] = simple_regret_err(
                    self.model,
                    self.subspace,
                    GridFunction(self.cfg.grid, values),
                    self._search,
                )
            return self._err_cache[key] < self.cfg.epsilon
        return False

    def _start_outer(self):
        bias = GridFunction(self.cfg.grid, self._incumbent_values())
        basis = tuple(
            gp.sample_on_grid(self.cfg.kappa, self.cfg.grid, self._rng)
            for _ in range(self.cfg.d)
        )
        self.subspace = Subspace(self.s, bias, basis)

    def ask(self) -> GridFunction:
        self._require_no_pending()
        self._advance()
        if self.finished:
            raise ProtocolError("run is complete")
        if self.subspace is None:
            self._start_outer()
        if self.phase == "init":
            lam = self._rng.standard_normal(self.cfg.d)
            g_values = self.subspace.bias.values + lam @ np.array(
                [h.values for h in self.subspace.basis]
            )
            self.pending = ("init", self.s, -1, lam, g_values)
        else:
            lam, g, _ = acquisition.maximise(
                self.model, self.subspace, self._schedule, self._search,
                self.t + 1, self._rng,
            )
            self.pending = ("inner", self.s, self.t, lam, g.values)
        return GridFunction(self.cfg.grid, self.pending[4])

    def tell(self, y: float, aux=None) -> RunRecord:
        self._require_pending()
        if not np.isfinite(y):
            raise InputError(f"observed value must be finite, got {y}")
        kind, s, t, lam, g_values = self.pending
        rec = self._record(kind, s, t, lam, y, aux)
        self._update_best(g_values, rec.y)
        if self._outer_best is None or rec.y > self._outer_best[1]:
            self._outer_best = (np.array(g_values), rec.y)
        self._obs.append(gp.Observation(GridFunction(self.cfg.grid, g_values), rec.y))
        if not self._defer_model:
            self._update_model(self._obs[-1])
        if kind == "init":
            self.i_init += 1
        else:
            self.t += 1
        self.pending = None
        return rec

    def _update_model(self, obs: gp.Observation):
        if self._mle:
            self._template, self.model = gp.tune_and_rebuild(
                self._obs, self._template, self._mle_grid, self.cfg.noise_sq
            )
        else:
            self.model = gp.condition(self.model, obs)

    # replay hooks ------------------------------------------------------

    def _can_defer_model(self) -> bool:
        # Tuned rebuilds are memoryless, so they can wait until the end of
        # replay; regret termination reads the model mid-replay, and the
        # incremental path must re-apply the identical update chain.
        return self._mle and self.cfg.termination == "budget"

    def _rebuild_deferred(self):
        if self._mle and self._obs and self.model.n != len(self._obs):
            self._template, self.model = gp.tune_and_rebuild(
                self._obs, self._template, self._mle_grid, self.cfg.noise_sq
            )

    def _restore_step(self, kind, s, t, lam):
        self._require_no_pending()
        self._advance()
        if self.finished:
            raise ProtocolError("state contains more evaluations than the run allows")
        if self.subspace is None:
            self._start_outer()
        if (kind == "init") != (self.phase == "init") or s != self.s:
            raise ProtocolError("state records disagree with the run schedule")
        if kind == "init":
            drawn = self._rng.standard_normal(self.cfg.d)
            g_values = self.subspace.bias.values + drawn @ np.array(
                [h.values for h in self.subspace.basis]
            )
            self.pending = ("init", self.s, -1, drawn, g_values)
        else:
            self._rng.uniform(
                -self.cfg.acq_lambda_box,
                self.cfg.acq_lambda_box,
                size=(self.cfg.acq_restarts, self.cfg.d),
            )
            g_values = acquisition.candidate_values(
                self.subspace, self._search, lam[None, :]
            )[0]
            self.pending = ("inner", self.s, self.t, np.asarray(lam, dtype=float), g_values)


class BernsteinLineEngine(_EngineBase):
    """GP-UCB line search over the weights of a degree-10 Bernstein
    polynomial: each outer iteration picks a random unit direction in
    weight space through the incumbent and optimises the line coordinate
    with a fresh scalar SE model."""

    def __init__(self, cfg: OptConfig, rng=None):
        if cfg.grid.dim != 1:
            raise ConfigError("the Bernstein line optimiser needs a 1-d grid")
        super().__init__(cfg, rng)
        self._B = bernstein_matrix(BERNSTEIN_DEGREE, grid_coordinates(cfg.grid)[:, 0])
        self._n_weights = BERNSTEIN_DEGREE + 1
        self.s = 0
        self.phase = "init"
        self.i_init = 0
        self.t = 0
        self.finished = False
        self._direction: np.ndarray | None = None
        self._line_origin: np.ndarray | None = None
        self._line_obs: list[gp.Observation] = []
        self._line_best: tuple[float, float] | None = None  # (theta, y)
        self._best_weights = np.zeros(self._n_weights)
        self._err_cache: dict[tuple[int, int], float] = {}
        self._mle = cfg.k_lengthscale == "mle"
        self._mle_grid = tuple(
            np.geomspace(cfg.mle_grid_min, cfg.mle_grid_max, cfg.mle_grid_points)
        )
        gamma0 = (
            math.sqrt(cfg.mle_grid_min * cfg.mle_grid_max)
            if self._mle
            else float(cfg.k_lengthscale)
        )
        self._template = ScalarKernelSpec("se", gamma0)
        self.model = gp.empty_model(self._template, cfg.noise_sq)
        self._search = AcqSearchConfig(
            cfg.acq_restarts, cfg.acq_local_steps, cfg.acq_lambda_box, cfg.l_max
        )
        self._schedule = UcbSchedule(cfg.acq_delta, 1)

    @property
    def done(self) -> bool:
        self._advance()
        return self.finished

    def _advance(self):
        if self.finished:
            return
        if self.phase == "init" and self._direction is not None:
            if self.i_init >= self.cfg.n_init:
                self.phase = "inner"
                self.t = 0
        while self.phase == "inner" and self._line_done():
            self.s += 1
            self._direction = None
            self._line_obs = []
            self._line_best = None
            self.model = gp.empty_model(self._template, self.cfg.noise_sq)
            self.phase = "init"
            self.i_init = 0
            self.t = 0
            if self.s >= self.cfg.S:
                self.finished = True
                return

    def _line_done(self) -> bool:
        if self.t >= self.cfg.T:
            return True
        if self.cfg.termination == "regret":
            key = (self.s, self.t)
            if key not in self._err_cache:
                self._err_cache[key] = self._line_err()
            return self._err_cache[key] < self.cfg.epsilon
        return False

    def _line_err(self) -> float:
        theta_best = self._line_best[0]
        mean, var = gp.posterior(self.model, np.array([theta_best]))
        rng = np.random.default_rng(_REGRET_SEARCH_SEED)

        def score(th_batch):
            m, v = gp.posterior_batch(self.model, th_batch)
            return -(m - np.sqrt(v))

        _, neg_min = acquisition.golden_multistart(score, 1, self._search, rng)
        return float(mean + math.sqrt(var) - (-neg_min))

    def _start_line(self):
        u = self._rng.standard_normal(self._n_weights)
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            raise NumericalError("degenerate zero direction draw")
        self._direction = u / norm
        self._line_origin = np.array(self._best_weights)

    def _point_on_line(self, theta: float, cap: bool):
        w = self._line_origin + theta * self._direction
        g = w @ self._B
        if cap:
            norm = math.sqrt(float(g @ g) * self.cfg.grid.weight)
            if norm > self.cfg.l_max:
                scale = self.cfg.l_max / norm
                w = w * scale
                g = g * scale
        return w, g

    def ask(self) -> GridFunction:
        self._require_no_pending()
        self._advance()
        if self.finished:
            raise ProtocolError("run is complete")
        if self._direction is None:
            self._start_line()
        if self.phase == "init":
            lam = self._rng.standard_normal(1)
            w, g_values = self._point_on_line(float(lam[0]), cap=False)
            self.pending = ("init", self.s, -1, lam, g_values, w)
        else:
            sqrt_beta = math.sqrt(acquisition.beta(self._schedule, self.t + 1))

            def score(th_batch):
                m, v = gp.posterior_batch(self.model, th_batch)
                return m + sqrt_beta * np.sqrt(v)

            lam, _ = acquisition.golden_multistart(score, 1, self._search, self._rng)
            w, g_values = self._point_on_line(float(lam[0]), cap=True)
            self.pending = ("inner", self.s, self.t, lam, g_values, w)
        return GridFunction(self.cfg.grid, self.pending[4])

    def tell(self, y: float, aux=None) -> RunRecord:
        self._require_pending()
        if not np.isfinite(y):
            raise InputError(f"observed value must be finite, got {y}")
        kind, s, t, lam, g_values, w = self.pending
        rec = self._record(kind, s, t, lam, y, aux)
        if self._update_best(g_values, rec.y):
            self._best_weights = np.array(w)
        theta = float(lam[0])
        if self._line_best is None or rec.y > self._line_best[1]:
            self._line_best = (theta, rec.y)
        self._line_obs.append(gp.Observation(np.array([theta]), rec.y))
        if not self._defer_model:
            self._update_model(self._line_obs[-1])
        if kind == "init":
            self.i_init += 1
        else:
            self.t += 1
        self.pending = None
        return rec

    def _update_model(self, obs: gp.Observation):
        if self._mle:
            self._template, self.model = gp.tune_and_rebuild(
                self._line_obs, self._template, self._mle_grid, self.cfg.noise_sq
            )
        else:
            self.model = gp.condition(self.model, obs)

    # replay hooks ------------------------------------------------------
    # The per-line model always gets rebuilt inside the active line, so
    # deferral would have to track line boundaries; lines are short (at
    # most n_init + T points), replaying them directly is cheap.

    def _restore_step(self, kind, s, t, lam):
        self._require_no_pending()
        self._advance()
        if self.finished:
            raise ProtocolError("state contains more evaluations than the run allows")
        if self._direction is None:
            self._start_line()
        if (kind == "init") != (self.phase == "init") or s != self.s:
            raise ProtocolError("state records disagree with the run schedule")
        if kind == "init":
            drawn = self._rng.standard_normal(1)
            w, g_values = self._point_on_line(float(drawn[0]), cap=False)
            self.pending = ("init", self.s, -1, drawn, g_values, w)
        else:
            self._rng.uniform(
                -self.cfg.acq_lambda_box,
                self.cfg.acq_lambda_box,
                size=(self.cfg.acq_restarts, 1),
            )
            lam = np.asarray(lam, dtype=float)
            w, g_values = self._point_on_line(float(lam[0]), cap=True)
            self.pending = ("inner", self.s, self.t, lam, g_values, w)


class RandomSearchEngine(_EngineBase):
    """Control baseline: every step evaluates a fresh random point
    g = sum_j lam_j h_j with new GP basis draws, same total budget."""

    def __init__(self, cfg: OptConfig, rng=None):
        super().__init__(cfg, rng)

    @property
    def done(self) -> bool:
        return len(self._trace) >= self.cfg.budget

    def ask(self) -> GridFunction:
        self._require_no_pending()
        if self.done:
            raise ProtocolError("run is complete")
        basis = np.array(
            [
                gp.sample_on_grid(self.cfg.kappa, self.cfg.grid, self._rng).values
                for _ in range(self.cfg.d)
            ]
        )
        lam = self._rng.standard_normal(self.cfg.d)
        g_values = lam @ basis
        self.pending = ("init", len(self._trace), -1, lam, g_values)
        return GridFunction(self.cfg.grid, g_values)

    def tell(self, y: float, aux=None) -> RunRecord:
        self._require_pending()
        if not np.isfinite(y):
            raise InputError(f"observed value must be finite, got {y}")
        kind, s, t, lam, g_values = self.pending
        rec = self._record(kind, s, t, lam, y, aux)
        self._update_best(g_values, rec.y)
        self.pending = None
        return rec

    def _restore_step(self, kind, s, t, lam):
        self.ask()


def make_engine(cfg: OptConfig, algorithm: str, rng=None) -> _EngineBase:
    if algorithm == "s3bfo":
        return SubspaceSearchEngine(cfg, rng)
    if algorithm == "fixed_subspace":
        return SubspaceSearchEngine(replace(cfg, S=1), rng)
    if algorithm == "linebo_bernstein":
        return BernsteinLineEngine(cfg, rng)
    if algorithm == "random_search":
        return RandomSearchEngine(cfg, rng)
    raise ConfigError(f"unknown algorithm {algorithm!r}")


# --- runners ------------------------------------------------------------


def _streams(cfg: OptConfig, rng):
    if rng is None:
        return rng_streams(cfg.seed)
    seeds = rng.integers(0, 2**63 - 1, size=2)
    return np.random.default_rng(int(seeds[0])), np.random.default_rng(int(seeds[1]))


def _drive(engine: _EngineBase, objective: Objective, noise_rng):
    aux_fn = getattr(objective, "aux", None)
    while not engine.done:
        g = engine.ask()
        y = float(objective.evaluate(g, noise_rng))
        if not np.isfinite(y):
            raise InputError(
                f"objective returned non-finite value at evaluation {len(engine.trace)}"
            )
        engine.tell(y, aux_fn(g) if aux_fn is not None else {})
    return engine.best, engine.trace


def run_s3bfo(objective: Objective, cfg: OptConfig, rng=None):
    """Full subspace-search run; returns ((best g, best y), trace)."""
    decisions, noise = _streams(cfg, rng)
    return _drive(SubspaceSearchEngine(cfg, decisions), objective, noise)


def run_fixed_subspace(objective: Objective, cfg: OptConfig, rng=None):
    """Single random subspace with the full inner budget (S forced to 1)."""
    decisions, noise = _streams(cfg, rng)
    return _drive(SubspaceSearchEngine(replace(cfg, S=1), decisions), objective, noise)


def run_linebo_bernstein(objective: Objective, cfg: OptConfig, rng=None):
    decisions, noise = _streams(cfg, rng)
    return _drive(BernsteinLineEngine(cfg, decisions), objective, noise)


def run_random_search(objective: Objective, cfg: OptConfig, rng=None):
    decisions, noise = _streams(cfg, rng)
    return _drive(RandomSearchEngine(cfg, decisions), objective, noise)


RUNNERS = {
    "s3bfo": run_s3bfo,
    "fixed_subspace": run_fixed_subspace,
    "linebo_bernstein": run_linebo_bernstein,
    "random_search": run_random_search,
}
