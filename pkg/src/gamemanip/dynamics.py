"""No-regret learning dynamics on bimatrix games.

Two simulators share one trajectory format:

* multiplicative weights (``mwua_run``), in expected or sampled mode;
* replicator dynamics (``replicator_run``) integrated with fixed-step RK4.

Games are converted to float arrays here, at the boundary; the exact
Fraction tables stay untouched.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .equilibria import TwoStageGame
from .errors import GameInputError, NumericalFailureError
from .game import COL, ROW, BimatrixGame, affine_rescale

SIMPLEX_TOL = 1e-9
METHODS = ("mwua-expected", "mwua-sampled", "replicator")


def normalize_for_dynamics(game: BimatrixGame) -> tuple[BimatrixGame, Fraction]:
    """Divide both players' tables by the largest absolute player payoff.

    Returns the scaled game and the divisor.  External tables are untouched.
    """
    cells = [v for m in (game.row_payoffs, game.col_payoffs) for r in m for v in r]
    scale = max((abs(v) for v in cells), default=Fraction(0))
    if scale == 0:
        return game, Fraction(1)
    inv = 1 / scale
    return affine_rescale(affine_rescale(game, ROW, inv), COL, inv), scale


def payoff_arrays(game: BimatrixGame) -> tuple[np.ndarray, np.ndarray]:
    """``(A, B)`` with ``A[i, j]`` Row's payoff and ``B[j, i]`` Col's payoff."""
    a = np.array([[float(v) for v in r] for r in game.row_payoffs], dtype=float)
    b = np.array([[float(v) for v in r] for r in game.col_payoffs], dtype=float).T
    return a, np.ascontiguousarray(b)


def _check_simplex(p: np.ndarray, name: str) -> None:
    if p.ndim != 1 or np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise GameInputError(f"{name} is not on the probability simplex: {p}")


# -- multiplicative weights -------------------------------------------------

@dataclass
class MwuaState:
    """Weights of both players at step ``step``.

    Weights are held as logarithms, so they stay strictly positive and finite
    over long runs where the raw products would overflow or underflow.
    """

    log_weights_row: np.ndarray
    log_weights_col: np.ndarray
    step: int = 1
    eta: float = 0.5

    @classmethod
    def uniform(cls, n_rows: int, n_cols: int, eta: float = 0.5) -> MwuaState:
        _check_eta(eta)
        return cls(np.zeros(n_rows), np.zeros(n_cols), 1, eta)

    @property
    def weights_row(self) -> np.ndarray:
        return np.exp(self.log_weights_row)

    @property
    def weights_col(self) -> np.ndarray:
        return np.exp(self.log_weights_col)

    @staticmethod
    def _distribution(log_w: np.ndarray) -> np.ndarray:
        w = np.exp(log_w - log_w.max())
        return w / w.sum()

    def distributions(self) -> tuple[np.ndarray, np.ndarray]:
        return self._distribution(self.log_weights_row), self._distribution(self.log_weights_col)


def _check_eta(eta: float) -> None:
    if not 0 < eta <= 0.5:
        raise GameInputError(f"eta must lie in (0, 1/2], got {eta}")


def _check_normalized(a: np.ndarray, b: np.ndarray) -> None:
    if max(np.abs(a).max(initial=0), np.abs(b).max(initial=0)) > 1:
        raise GameInputError("multiplicative weights needs payoffs in [-1, 1]; normalize the game first")


def _mwua_update(state: MwuaState, a, b, mode: str, rng) -> tuple[MwuaState, tuple[int, int] | None]:
    x, y = state.distributions()
    realized = None
    if mode == "expected":
        m_row, m_col = a @ y, b @ x
    elif mode == "sampled":
        i = min(int(np.searchsorted(np.cumsum(x), rng.random(), side="right")), len(x) - 1)
        j = min(int(np.searchsorted(np.cumsum(y), rng.random(), side="right")), len(y) - 1)
        realized = (i, j)
        m_row, m_col = a[:, j], b[:, i]
    else:
        raise GameInputError(f"unknown mode {mode!r}")
    f_row = 1.0 + state.eta * m_row
    f_col = 1.0 + state.eta * m_col
    # eta <= 1/2 and |m| <= 1 keep every factor >= 1/2
    if f_row.min() <= 0 or f_col.min() <= 0:
        raise NumericalFailureError(f"non-positive weight factor at step {state.step}", last_state=(x, y))
    nxt = MwuaState(
        state.log_weights_row + np.log(f_row),
        state.log_weights_col + np.log(f_col),
        state.step + 1,
        state.eta,
    )
    return nxt, realized


def mwua_step(state: MwuaState, game: BimatrixGame, mode: str = "expected", rng=None):
    """One round: observe payoffs of every action, then ``w_i <- w_i (1 + eta m_i)``.

    Returns ``(next_state, realized)`` where ``realized`` is the sampled
    ``(row, col)`` action pair, or None in expected mode.
    """
    _check_eta(state.eta)
    a, b = payoff_arrays(game)
    _check_normalized(a, b)
    if mode == "sampled" and rng is None:
        rng = np.random.default_rng()
    return _mwua_update(state, a, b, mode, rng)


# -- trajectories -----------------------------------------------------------

@dataclass
class Trajectory:
    """Mixed strategies of both players sampled over time."""

    method: str
    row_actions: tuple[str, ...]
    col_actions: tuple[str, ...]
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    payoff_normalizer: Fraction = Fraction(1)
    realized_actions: list[tuple[int, int]] | None = None
    step_size: float = 1.0
    # most negative component seen before clamping (replicator only)
    min_unclamped: float = 0.0
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def samples(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        return [(float(t), self.x[k], self.y[k]) for k, t in enumerate(self.times)]

    def final(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x[-1], self.y[-1]

    def mass(self, player: str, labels: Sequence[str], index: int = -1) -> float:
        """Probability ``player`` puts on ``labels`` at sample ``index``."""
        actions = self.row_actions if player == ROW else self.col_actions
        probs = self.x if player == ROW else self.y
        return float(sum(probs[index][actions.index(a)] for a in labels))

    def header(self) -> list[str]:
        cols = ["t"] + [f"Row:{a}" for a in self.row_actions] + [f"Col:{a}" for a in self.col_actions]
        if self.realized_actions is not None:
            cols += ["row_action", "col_action"]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        for k, t in enumerate(self.times):
            row = [_fmt(t)] + [_fmt(v) for v in self.x[k]] + [_fmt(v) for v in self.y[k]]
            if self.realized_actions is not None:
                i, j = self.realized_actions[k]
                row += [self.row_actions[i], self.col_actions[j]]
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, method: str | None = None, payoff_normalizer=Fraction(1)) -> Trajectory:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if not header or header[0] != "t":
            raise GameInputError("trajectory CSV must start with a 't' column")
        sampled = header[-2:] == ["row_action", "col_action"]
        names = header[1:-2] if sampled else header[1:]
        row_actions = tuple(n[4:] for n in names if n.startswith("Row:"))
        col_actions = tuple(n[4:] for n in names if n.startswith("Col:"))
        if len(row_actions) + len(col_actions) != len(names):
            raise GameInputError("trajectory CSV columns must be 'Row:<action>' or 'Col:<action>'")
        n = len(row_actions)
        times, xs, ys, realized = [], [], [], []
        for rec in reader:
            times.append(float(rec[0]))
            vals = [float(v) for v in rec[1 : 1 + len(names)]]
            xs.append(vals[:n])
            ys.append(vals[n:])
            if sampled:
                realized.append((row_actions.index(rec[-2]), col_actions.index(rec[-1])))
        if method is None:
            method = "mwua-sampled" if sampled else "replicator"
        return cls(
            method,
            row_actions,
            col_actions,
            np.array(times),
            np.array(xs).reshape(-1, n),
            np.array(ys).reshape(-1, len(col_actions)),
            payoff_normalizer,
            realized if sampled else None,
        )


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def mwua_run(
    game: BimatrixGame,
    eta: float = 0.5,
    steps: int = 100_000,
    mode: str = "expected",
    seed: int | None = None,
    stride: int = 1,
) -> Trajectory:
    """Run multiplicative weights from uniform weights for ``steps`` rounds.

    The game is first scaled into [-1, 1] (see ``normalize_for_dynamics``).
    Sample ``t`` holds the distribution used in round ``t``, so a one-step
    run contains only the uniform point.
    """
    if steps < 1:
        raise GameInputError("steps must be >= 1")
    if stride < 1:
        raise GameInputError("stride must be >= 1")
    _check_eta(eta)
    scaled, scale = normalize_for_dynamics(game)
    a, b = payoff_arrays(scaled)
    _check_normalized(a, b)
    if mode not in ("expected", "sampled"):
        raise GameInputError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    n, m = game.shape
    # The loop carries the normalised distributions directly: dividing all
    # weights by their sum each round leaves p^(t) unchanged.
    x, y = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    times, xs, ys, realized = [], [], [], []
    for t in range(1, steps + 1):
        record = (t - 1) % stride == 0 or t == steps
        if record:
            times.append(t)
            xs.append(x)
            ys.append(y)
        if mode == "expected":
            if t == steps:
                break
            m_row, m_col = a @ y, b @ x
        else:
            i = min(int(np.searchsorted(np.cumsum(x), rng.random(), side="right")), n - 1)
            j = min(int(np.searchsorted(np.cumsum(y), rng.random(), side="right")), m - 1)
            if record:
                realized.append((i, j))
            m_row, m_col = a[:, j], b[:, i]
        f_row = 1.0 + eta * m_row
        f_col = 1.0 + eta * m_col
        if f_row.min() <= 0 or f_col.min() <= 0:
            raise NumericalFailureError(f"non-positive weight factor at step {t}", last_state=(x, y))
        x = x * f_row
        x /= x.sum()
        y = y * f_col
        y /= y.sum()
    return Trajectory(
        f"mwua-{mode}",
        game.row_actions,
        game.col_actions,
        np.array(times, dtype=float),
        np.array(xs),
        np.array(ys),
        scale,
        realized if mode == "sampled" else None,
        step_size=1.0,
        meta={"eta": eta, "steps": steps, "mode": mode, "seed": seed},
    )


# -- replicator dynamics ----------------------------------------------------

def replicator_field(x, y, game: BimatrixGame) -> tuple[np.ndarray, np.ndarray]:
    """Growth rates ``x_i[(Ay)_i - x.Ay]`` and ``y_j[(Bx)_j - y.Bx]``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_simplex(x, "x")
    _check_simplex(y, "y")
    a, b = payoff_arrays(game)
    ay, bx = a @ y, b @ x
    return x * (ay - x @ ay), y * (bx - y @ bx)


def _stacked_field(a: np.ndarray, b: np.ndarray):
    # z = (x, y) and K z gives every action's payoff against the opponent;
    # the field is z*p minus z times each player's mean payoff.
    n, m = a.shape
    k = np.zeros((n + m, n + m))
    k[:n, n:] = a
    k[n:, :n] = b
    starts, counts = [0, n], [n, m]

    def f(z):
        w = z * (k @ z)
        return w - z * np.repeat(np.add.reduceat(w, starts), counts)

    return f, starts, counts


def replicator_run(
    game: BimatrixGame,
    initial: str | tuple[Sequence[float], Sequence[float]] = "uniform",
    step_size: float = 0.01,
    horizon: float = 1000.0,
    stride: int = 100,
    normalize: bool = False,
) -> Trajectory:
    """Integrate the replicator equations with classical RK4 at a fixed step.

    After each step negative components are clamped to zero and each
    player's vector is rescaled to sum to one.  Samples are kept every
    ``stride`` steps plus the final state.
    """
    if step_size <= 0 or horizon <= 0:
        raise GameInputError("step_size and horizon must be positive")
    if stride < 1:
        raise GameInputError("stride must be >= 1")
    scale = Fraction(1)
    if normalize:
        game, scale = normalize_for_dynamics(game)
    n, m = game.shape
    if initial == "uniform":
        x0, y0 = np.full(n, 1.0 / n), np.full(m, 1.0 / m)
    else:
        x0, y0 = (np.asarray(v, dtype=float) for v in initial)
        if x0.shape != (n,) or y0.shape != (m,):
            raise GameInputError("initial vectors do not match the game's shape")
        _check_simplex(x0, "initial x")
        _check_simplex(y0, "initial y")
    a, b = payoff_arrays(game)
    f, starts, counts = _stacked_field(a, b)
    h = float(step_size)
    half, sixth = 0.5 * h, h / 6.0
    n_steps = max(1, int(round(horizon / h)))
    z = np.concatenate([x0, y0])
    times, zs = [0.0], [z.copy()]
    min_unclamped = float(z.min())
    for k in range(1, n_steps + 1):
        k1 = f(z)
        k2 = f(z + half * k1)
        k3 = f(z + half * k2)
        k4 = f(z + h * k3)
        nz = z + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        low = nz.min()
        if not np.isfinite(low) or not np.isfinite(nz.max()):
            raise NumericalFailureError(f"replicator state diverged at step {k}", last_state=(z[:n], z[n:]))
        if low < min_unclamped:
            min_unclamped = float(low)
        np.maximum(nz, 0.0, out=nz)
        nz /= np.repeat(np.add.reduceat(nz, starts), counts)
        z = nz
        if k % stride == 0 or k == n_steps:
            times.append(k * h)
            zs.append(z.copy())
    zs = np.array(zs)
    return Trajectory(
        "replicator",
        game.row_actions,
        game.col_actions,
        np.array(times),
        zs[:, :n],
        zs[:, n:],
        scale,
        None,
        step_size=h,
        min_unclamped=min_unclamped,
        meta={"step_size": h, "horizon": horizon, "stride": stride},
    )


# -- convergence ------------------------------------------------------------

@dataclass(frozen=True)
class InducedPlay:
    """Outcome implied by converged supports: optional decision plus subgame profile labels."""

    decision: str | None
    profile: tuple[str, str]

    def to_dict(self) -> dict[str, Any]:
        return {"decision": self.decision, "profile": list(self.profile)}


@dataclass(frozen=True)
class ConvergenceVerdict:
    converged: bool
    row_support: frozenset[int]
    col_support: frozenset[int]
    induced_play: InducedPlay | None
    steps_to_converge: int | None
    row_support_labels: tuple[str, ...] = ()
    col_support_labels: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "converged": self.converged,
            "row_support": list(self.row_support_labels),
            "col_support": list(self.col_support_labels),
            "induced_play": self.induced_play.to_dict() if self.induced_play else None,
            "steps_to_converge": self.steps_to_converge,
        }


def support(p: np.ndarray, epsilon: float) -> frozenset[int]:
    """Smallest set of actions carrying at least ``1 - epsilon`` of the mass."""
    order = sorted(range(len(p)), key=lambda i: (-p[i], i))
    chosen, total = [], 0.0
    for i in order:
        chosen.append(i)
        total += p[i]
        if total >= 1.0 - epsilon:
            break
    return frozenset(chosen)


def _induce(stage, row_sup, col_sup) -> InducedPlay | None:
    if isinstance(stage, TwoStageGame):
        offeree_sup, plan_sup = (row_sup, col_sup) if stage.offeree == ROW else (col_sup, row_sup)
        decoded = {stage.decode_offeree_action(i) for i in offeree_sup}
        if len(decoded) != 1:
            return None
        (decision, own), = decoded
        pick = 0 if decision == "Accept" else 1
        replies = {stage.decode_plan(j)[pick] for j in plan_sup}
        if len(replies) != 1:
            return None
        (reply,) = replies
        sub = stage.subgame(decision)
        row, col = (own, reply) if stage.offeree == ROW else (reply, own)
        return InducedPlay(decision, (sub.row_actions[row], sub.col_actions[col]))
    if len(row_sup) != 1 or len(col_sup) != 1:
        return None
    (i,), (j,) = row_sup, col_sup
    return InducedPlay(None, (stage.row_actions[i], stage.col_actions[j]))


def diagnose_convergence(
    traj: Trajectory,
    stage: TwoStageGame | BimatrixGame,
    epsilon_conv: float = 0.01,
    window: int = 100,
) -> ConvergenceVerdict:
    """Check whether the final ``window`` samples sit on one stable support.

    Supports that mix contingent plans agreeing on the realised branch
    count as converged; for a plain game each support must be a single
    action.  ``steps_to_converge`` counts updates from the first sample to
    the start of the final stable stretch.
    """
    if len(traj) == 0:
        raise GameInputError("empty trajectory")
    supports = [(support(traj.x[k], epsilon_conv), support(traj.y[k], epsilon_conv)) for k in range(len(traj))]
    final = supports[-1]
    tail = supports[-window:]
    stable = all(s == final for s in tail)
    induced = _induce(stage, *final)
    converged = stable and induced is not None
    start = None
    if converged:
        start = len(supports) - 1
        while start > 0 and supports[start - 1] == final:
            start -= 1
        start = int(round((traj.times[start] - traj.times[0]) / traj.step_size))
    row_sup, col_sup = final
    return ConvergenceVerdict(
        converged,
        row_sup,
        col_sup,
        induced if converged else None,
        start,
        tuple(traj.row_actions[i] for i in sorted(row_sup)),
        tuple(traj.col_actions[j] for j in sorted(col_sup)),
    )
