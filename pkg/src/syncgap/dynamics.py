"""Coupled Rossler simulation with mid-run link insertion.

Integrates  dx_i/dt = f(x_i) + alpha * sum_j W_ij H(x_j - x_i)  with f the
Rossler field and H a linear map (identity by default) using fixed-step
classical Runge-Kutta.  The coupling is evaluated on state differences, so
the synchronous manifold is invariant to machine precision for every alpha.
Events swap the graph at a grid-aligned time and integration continues on
the same sampling grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import BlowUpError, NoBracketError, NoSpanningTreeError
from .graphs import Edge, WeightedDigraph, adjacency, build_graph, condensation

BLOWUP_NORM = 1e6
SYNC_THRESHOLD = 1e-6
# Fraction of the run over which the synchronization verdict must hold.
SYNC_TAIL = 0.1


def rossler_field(state, params=(0.2, 0.2, 7.0)) -> np.ndarray:
    """Rossler vector field: (-(y + z), x + a*y, b + z*(x - c))."""
    x, y, z = state
    a, b, c = params
    return np.array([-(y + z), x + a * y, b + z * (x - c)])


@njit(cache=True, inline="always")
def _field(W, G, alpha, a, b, c, x):
    n = x.shape[0]
    out = np.empty_like(x)
    for i in range(n):
        out[i, 0] = -(x[i, 1] + x[i, 2])
        out[i, 1] = x[i, 0] + a * x[i, 1]
        out[i, 2] = b + x[i, 2] * (x[i, 0] - c)
    if alpha != 0.0:
        for i in range(n):
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            for j in range(n):
                wij = W[i, j]
                if wij != 0.0:
                    d0 = x[j, 0] - x[i, 0]
                    d1 = x[j, 1] - x[i, 1]
                    d2 = x[j, 2] - x[i, 2]
                    s0 += wij * (G[0, 0] * d0 + G[0, 1] * d1 + G[0, 2] * d2)
                    s1 += wij * (G[1, 0] * d0 + G[1, 1] * d1 + G[1, 2] * d2)
                    s2 += wij * (G[2, 0] * d0 + G[2, 1] * d1 + G[2, 2] * d2)
            out[i, 0] += alpha * s0
            out[i, 1] += alpha * s1
            out[i, 2] += alpha * s2
    return out


@njit(cache=True)
def _rk4_advance(W, G, alpha, a, b, c, x, dt, steps):
    for _ in range(steps):
        k1 = _field(W, G, alpha, a, b, c, x)
        k2 = _field(W, G, alpha, a, b, c, x + 0.5 * dt * k1)
        k3 = _field(W, G, alpha, a, b, c, x + 0.5 * dt * k2)
        k4 = _field(W, G, alpha, a, b, c, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Everything a coupled run needs.

    ``events`` are (time, (src, dst, weight)) arc insertions applied at the
    nearest step boundary; 0-based node indices.  ``coupling_matrix`` is the
    linear coupling map dH(0), identity when None; its eigenvalues must be
    real and positive so the spectral stability condition makes sense.
    ``seed`` and ``jitter`` control the initial-condition perturbation used
    by the helpers (the integrator itself is deterministic).
    """

    graph: WeightedDigraph
    alpha: float
    local_params: tuple[float, float, float] = (0.2, 0.2, 7.0)
    coupling_matrix: np.ndarray | None = None
    dt: float = 0.01
    t_end: float = 100.0
    events: tuple[tuple[float, Edge], ...] = ()
    seed: int = 0
    save_stride: int = 10
    jitter: float = 1e-3

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.save_stride < 1:
            raise ValueError("save_stride must be at least 1")
        for t_e, _edge in self.events:
            if not (0.0 < t_e < self.t_end):
                raise ValueError(f"event time {t_e} outside (0, t_end)")
        G = np.eye(3) if self.coupling_matrix is None else \
            np.asarray(self.coupling_matrix, dtype=float)
        if G.shape != (3, 3):
            raise ValueError("coupling matrix must be 3x3")
        lam = np.linalg.eigvals(G)
        if np.abs(lam.imag).max() > 1e-10 or lam.real.min() <= 0:
            raise ValueError("coupling matrix must have real positive eigenvalues")
        object.__setattr__(self, "coupling_matrix", G)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled run: times (S,), states (S, n, 3), per-sample sync error, and
    the edge insertions that were applied (with their grid-aligned times)."""

    times: np.ndarray
    states: np.ndarray
    sync_error: np.ndarray
    events_applied: tuple[tuple[float, Edge], ...]


def max_pairwise_distance(states: np.ndarray) -> np.ndarray:
    """Largest Euclidean distance between any two node states, per sample."""
    s, n = states.shape[0], states.shape[1]
    chunk = max(1, 10_000_000 // max(1, n * n * 3))
    out = np.empty(s)
    for lo in range(0, s, chunk):
        block = states[lo:lo + chunk]
        diff = block[:, :, None, :] - block[:, None, :, :]
        out[lo:lo + chunk] = np.sqrt((diff ** 2).sum(axis=-1)).max(axis=(1, 2))
    return out


def integrate(config: SimConfig, x0) -> Trajectory:
    """Fixed-step RK4 run with link-insertion events.

    States are sampled every ``save_stride`` steps (plus the final step).
    Any state with norm above 1e6 or a non-finite entry aborts the run with
    BlowUpError carrying the first offending sample time.
    """
    x = np.array(x0, dtype=float)
    n = config.graph.n
    if x.shape != (n, 3):
        raise ValueError(f"x0 must have shape ({n}, 3), got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("x0 must be finite")
    a, b, c = config.local_params
    G = config.coupling_matrix
    dt = config.dt
    total = int(round(config.t_end / dt))
    event_steps: dict[int, list[Edge]] = {}
    for t_e, edge in config.events:
        k = int(round(t_e / dt))
        k = min(max(k, 1), total - 1)
        event_steps.setdefault(k, []).append(edge)
    sample_steps = set(range(0, total + 1, config.save_stride))
    sample_steps.add(total)
    stops = sorted(sample_steps | set(event_steps))

    graph = config.graph
    W = adjacency(graph)
    times, samples, applied = [], [], []
    prev = 0
    if 0 in sample_steps:
        times.append(0.0)
        samples.append(x.copy())
    for stop in stops:
        if stop == 0:
            continue
        x = _rk4_advance(W, G, config.alpha, a, b, c, x, dt, stop - prev)
        prev = stop
        t = stop * dt
        if not np.isfinite(x).all() or np.abs(x).max() > BLOWUP_NORM:
            raise BlowUpError(t)
        if stop in sample_steps:
            times.append(t)
            samples.append(x.copy())
        if stop in event_steps:
            for edge in event_steps[stop]:
                graph = build_graph(graph.n, graph.edges + (edge,))
                applied.append((t, edge))
            W = adjacency(graph)
    states = np.stack(samples)
    return Trajectory(times=np.array(times), states=states,
                      sync_error=max_pairwise_distance(states),
                      events_applied=tuple(applied))


def sync_error_series(traj: Trajectory, fit_window: tuple[float, float] | None = None):
    """Per-sample max pairwise distance plus a fitted exponential rate.

    The rate is the least-squares slope of log(error) over ``fit_window``
    (the final half of the run by default); samples with zero error are
    skipped, and None is returned when fewer than two usable samples
    remain.  Negative rates mean contraction toward synchrony.
    """
    errors = max_pairwise_distance(traj.states)
    if fit_window is None:
        t1 = float(traj.times[-1])
        fit_window = (0.5 * t1, t1)
    lo, hi = fit_window
    mask = (traj.times >= lo) & (traj.times <= hi) & (errors > 0)
    rate = None
    if mask.sum() >= 2:
        coeffs = np.polyfit(traj.times[mask], np.log(errors[mask]), 1)
        rate = float(coeffs[0])
    return errors, rate


def is_synchronized(traj: Trajectory, threshold: float = SYNC_THRESHOLD,
                    tail_frac: float = SYNC_TAIL) -> bool:
    """True when the sync error stays below ``threshold`` over the final
    ``tail_frac`` of the run."""
    t1 = float(traj.times[-1])
    tail = traj.times >= (1.0 - tail_frac) * t1
    return bool(traj.sync_error[tail].max() < threshold)


def synchronous_state(local_params=(0.2, 0.2, 7.0), warmup: float = 500.0,
                      dt: float = 0.01, start=(1.0, 1.0, 1.0)) -> np.ndarray:
    """A point on the attractor: integrate one uncoupled node past transients."""
    a, b, c = local_params
    x = np.array([start], dtype=float)
    W = np.zeros((1, 1))
    x = _rk4_advance(W, np.eye(3), 0.0, a, b, c, x, dt, int(round(warmup / dt)))
    if not np.isfinite(x).all() or np.abs(x).max() > BLOWUP_NORM:
        raise BlowUpError(warmup, f"local dynamics escaped during the {warmup:g}-unit warmup")
    return x[0]


def jittered_initial(n: int, sync_point, jitter: float = 1e-3, seed: int = 0) -> np.ndarray:
    """Synchronous state replicated over n nodes plus seeded uniform jitter."""
    rng = np.random.default_rng(seed)
    base = np.tile(np.asarray(sync_point, dtype=float), (n, 1))
    return base + jitter * rng.uniform(-1.0, 1.0, size=(n, 3))


def estimate_alpha_c(graph: WeightedDigraph, local_params=(0.2, 0.2, 7.0),
                     coupling_matrix=None, *, alpha_lo: float = 0.002,
                     alpha_hi: float = 1.0, bisect_iters: int = 12,
                     dt: float = 0.01, t_end: float = 400.0, save_stride: int = 10,
                     jitter: float = 1e-3, seed: int = 0,
                     threshold: float = SYNC_THRESHOLD, tail_frac: float = SYNC_TAIL,
                     warmup: float = 500.0) -> float:
    """Empirical critical coupling by bisection on alpha.

    Each candidate integrates the same jittered neighborhood of the
    synchronous state and tests whether the sync error decays below
    ``threshold`` and stays there over the final stretch of the run.
    Raises NoBracketError when the bracket does not straddle the
    transition.
    """
    if not condensation(graph).satisfies_a1:
        raise NoSpanningTreeError("graph violates the single-root condition")
    sync_point = synchronous_state(local_params, warmup=warmup, dt=dt)
    x0 = jittered_initial(graph.n, sync_point, jitter=jitter, seed=seed)

    def synced(alpha: float) -> bool:
        cfg = SimConfig(graph=graph, alpha=alpha, local_params=local_params,
                        coupling_matrix=coupling_matrix, dt=dt, t_end=t_end,
                        save_stride=save_stride, seed=seed, jitter=jitter)
        return is_synchronized(integrate(cfg, x0), threshold, tail_frac)

    if synced(alpha_lo):
        raise NoBracketError(f"already synchronizes at alpha_lo={alpha_lo:g}")
    if not synced(alpha_hi):
        raise NoBracketError(f"still unsynchronized at alpha_hi={alpha_hi:g}")
    lo, hi = alpha_lo, alpha_hi
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        if synced(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- flat key-value config files -------------------------------------------
#
#   graph = path/to/edges      (required, relative paths resolve to the file)
#   alpha = 0.1                (required)
#   a = 0.2  b = 0.2  c = 7.0  dt = 0.01  t_end = 100  seed = 0
#   save_stride = 10  jitter = 1e-3
#   coupling = 1 0 0 0 1 0 0 0 1      (row-major 3x3, optional)
#   event = 4000 4 2 2.0              (time src dst weight, 1-based, repeatable)

def load_sim_config(path) -> SimConfig:
    """Parse a flat key-value config file into a SimConfig."""
    import os

    from .errors import ParseError
    from .graphs import load_edge_list

    base = os.path.dirname(os.path.abspath(path))
    values: dict[str, str] = {}
    events: list[tuple[float, Edge]] = []
    coupling = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ParseError(f"{path}:{line_no}: expected 'key = value'")
            key, _, val = body.partition("=")
            key, val = key.strip().lower(), val.strip()
            try:
                if key == "event":
                    t_s, u_s, v_s, w_s = val.split()
                    events.append((float(t_s),
                                   (int(u_s) - 1, int(v_s) - 1, float(w_s))))
                elif key == "coupling":
                    nums = [float(tok) for tok in val.split()]
                    if len(nums) != 9:
                        raise ValueError("expected 9 numbers")
                    coupling = np.array(nums).reshape(3, 3)
                elif key in {"graph", "alpha", "a", "b", "c", "dt", "t_end",
                             "seed", "save_stride", "jitter"}:
                    values[key] = val
                else:
                    raise ValueError(f"unknown key {key!r}")
            except ValueError as exc:
                raise ParseError(f"{path}:{line_no}: {exc}") from exc
    if "graph" not in values:
        raise ParseError(f"{path}: missing required key 'graph'")
    if "alpha" not in values:
        raise ParseError(f"{path}: missing required key 'alpha'")
    graph_path = values["graph"]
    if not os.path.isabs(graph_path):
        graph_path = os.path.join(base, graph_path)
    graph = load_edge_list(graph_path)

    def num(key, default):
        return float(values[key]) if key in values else default

    return SimConfig(
        graph=graph,
        alpha=float(values["alpha"]),
        local_params=(num("a", 0.2), num("b", 0.2), num("c", 7.0)),
        coupling_matrix=coupling,
        dt=num("dt", 0.01),
        t_end=num("t_end", 100.0),
        events=tuple(events),
        seed=int(values.get("seed", "0")),
        save_stride=int(values.get("save_stride", "10")),
        jitter=num("jitter", 1e-3),
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV export: header ``t,sync_error,x_1_1,...`` (1-based node, dim)."""
    n = traj.states.shape[1]
    cols = [f"x_{i + 1}_{d + 1}" for i in range(n) for d in range(3)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,sync_error," + ",".join(cols) + "\n")
        flat = traj.states.reshape(traj.states.shape[0], -1)
        for t, err, row in zip(traj.times, traj.sync_error, flat):
            fields = [f"{t:.12g}", f"{err:.12g}"] + [f"{v:.12g}" for v in row]
            fh.write(",".join(fields) + "\n")
