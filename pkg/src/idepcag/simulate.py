"""Trajectory generation, by operator products and by direct integration.

``solve_cauchy`` propagates with the cached transition operators (the same
machinery that builds the monodromy matrix).  ``solve_direct`` is a
deliberately independent oracle: per interval it resolves the value at the
argument anchor by a linear solve against ``J`` (this is what makes the
advanced argument well posed), then integrates the resulting inhomogeneous
ODE with a different stepper (DOP853 instead of RK45), and applies the
impulse at the right endpoint.

Output grids always include every breakpoint in range with a paired
left-limit / post-impulse record, so consumers can plot the jumps
faithfully.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .linalg import NumericalError, solve
from .model import SystemSpec
from .transition import interval_operators

__all__ = ["Trajectory", "solve_cauchy", "solve_direct", "max_discrepancy"]

KIND_SAMPLE = "sample"
KIND_LEFT = "left_limit"
KIND_POST = "post_impulse"


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped sampled solution.

    ``kinds[i]`` distinguishes plain grid samples from the left-limit /
    post-impulse pairs recorded at every breakpoint in range.  ``states``
    is complex with one row per record.
    """

    times: np.ndarray
    kinds: tuple
    states: np.ndarray
    method: str
    t_end: float
    dt_out: float

    @property
    def n(self) -> int:
        return self.states.shape[1]

    def impulse_pairs(self):
        """(time, left_limit_state, post_impulse_state) per breakpoint."""
        out = []
        for i, kind in enumerate(self.kinds):
            if kind == KIND_LEFT:
                out.append((self.times[i], self.states[i], self.states[i + 1]))
        return out

    def write_csv(self, stream) -> None:
        """CSV rows ``t,kind,re_x1,im_x1,...``; floats as %.12e."""
        header = ["t", "kind"]
        for j in range(1, self.n + 1):
            header += [f"re_x{j}", f"im_x{j}"]
        stream.write(",".join(header) + "\n")
        for t, kind, state in zip(self.times, self.kinds, self.states):
            cells = [f"{t:.12e}", kind]
            for z in state:
                cells += [f"{z.real:.12e}", f"{z.imag:.12e}"]
            stream.write(",".join(cells) + "\n")


def _near(a, b):
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def _plan(system, t_end, dt_out):
    """Per-interval work plan: (k, t_start, t_stop, interior sample times,
    has_impulse_at_stop)."""
    grid = system.grid
    breaks = [t for _, t in grid.breakpoints_between(0.0, t_end)]
    samples = []
    i = 1
    while True:
        t = i * dt_out
        if t >= t_end or _near(t, t_end):
            break
        if not any(_near(t, b) for b in breaks):
            samples.append(t)
        i += 1

    plan = []
    k = 0
    t_cursor = 0.0
    while t_cursor < t_end and not _near(t_cursor, t_end):
        t_next = grid.time_at(k + 1)
        stops_at_break = t_next < t_end or _near(t_next, t_end)
        t_stop = t_next if stops_at_break else t_end
        inside = [t for t in samples if t_cursor < t < t_stop and not _near(t, t_stop)]
        plan.append((k, t_cursor, t_stop, inside, stops_at_break))
        t_cursor = t_stop
        k += 1
    return plan


def _finish(records, method, t_end, dt_out):
    times = np.array([r[0] for r in records], dtype=float)
    kinds = tuple(r[1] for r in records)
    states = np.array([r[2] for r in records], dtype=complex)
    return Trajectory(times, kinds, states, method, t_end, dt_out)


def solve_cauchy(system: SystemSpec, x0, t_end: float, dt_out: float) -> Trajectory:
    """Trajectory ``x(t) = W(t, 0) x0`` on the output grid plus breakpoints."""
    if t_end <= 0 or dt_out <= 0:
        raise ValueError("t_end and dt_out must be positive")
    x0 = np.asarray(x0, dtype=complex).reshape(system.n)
    ops_base = interval_operators(system)
    records = [(0.0, KIND_SAMPLE, x0.copy())]
    x_k = x0.copy()
    for k, t_start, t_stop, inside, has_impulse in _plan(system, t_end, dt_out):
        ops = ops_base[k % system.p]
        shift = (k // system.p) * system.omega
        anchor = ops.E_left_inv @ x_k
        for t in inside:
            records.append((t, KIND_SAMPLE, ops.e_at(t - shift) @ anchor))
        left = ops.e_at(t_stop - shift) @ anchor
        if has_impulse:
            post = system.impulse_factor(k + 1) @ left
            records.append((t_stop, KIND_LEFT, left))
            records.append((t_stop, KIND_POST, post))
            x_k = post
        else:
            records.append((t_stop, KIND_SAMPLE, left))
    return _finish(records, "cauchy", t_end, dt_out)


def _direct_anchor_value(system, k, x_k):
    """State at the argument anchor zeta_k from the interval entry value.

    For the retarded anchor (zeta_k = t_k) this is the entry value itself;
    otherwise the advanced fixed point solves
    ``J(t_k, zeta_k) x(zeta_k) = Phi(zeta_k, t_k) x(t_k)``.
    """
    grid = system.grid
    t_k = grid.time_at(k)
    zeta = grid.arg_at(k)
    if zeta == t_k:
        return x_k
    n = system.n

    def rhs(u, y):
        Au = system.A.eval(u)
        Bu = system.B.eval(u)
        Psi = y[: n * n].reshape(n, n)
        K = y[n * n :].reshape(n, n)
        return np.concatenate(((-Psi @ Au).ravel(), (Psi @ Bu).ravel()))

    y0 = np.concatenate((np.eye(n).ravel(), np.zeros(n * n)))
    sol = solve_ivp(
        rhs,
        (zeta, t_k),
        y0,
        method="DOP853",
        rtol=system.tolerances.ode_rel,
        atol=system.tolerances.ode_abs,
    )
    if not sol.success:
        raise NumericalError(f"anchor integration failed: {sol.message}")
    Psi = sol.y[: n * n, -1].reshape(n, n)
    K = sol.y[n * n :, -1].reshape(n, n)
    J = np.eye(n) + K  # J(t_k, zeta_k)
    return solve(J, Psi @ x_k)


def solve_direct(system: SystemSpec, x0, t_end: float, dt_out: float) -> Trajectory:
    """Independent trajectory oracle via per-interval direct integration."""
    if t_end <= 0 or dt_out <= 0:
        raise ValueError("t_end and dt_out must be positive")
    x0 = np.asarray(x0, dtype=complex).reshape(system.n)
    records = [(0.0, KIND_SAMPLE, x0.copy())]
    x_k = x0.copy()
    for k, t_start, t_stop, inside, has_impulse in _plan(system, t_end, dt_out):
        v = _direct_anchor_value(system, k, x_k)
        forcing_anchor = v.copy()

        def rhs(u, y):
            return system.A.eval(u) @ y + system.B.eval(u) @ forcing_anchor

        sol = solve_ivp(
            rhs,
            (t_start, t_stop),
            x_k,
            method="DOP853",
            rtol=system.tolerances.ode_rel,
            atol=system.tolerances.ode_abs,
            dense_output=True,
        )
        if not sol.success:
            raise NumericalError(f"interval integration failed: {sol.message}")
        for t in inside:
            records.append((t, KIND_SAMPLE, sol.sol(t)))
        left = sol.y[:, -1]
        if has_impulse:
            post = system.impulse_factor(k + 1) @ left
            records.append((t_stop, KIND_LEFT, left))
            records.append((t_stop, KIND_POST, post))
            x_k = post
        else:
            records.append((t_stop, KIND_SAMPLE, left))
    return _finish(records, "direct", t_end, dt_out)


def max_discrepancy(a: Trajectory, b: Trajectory) -> float:
    """Max entrywise distance between two trajectories on the same schedule."""
    if a.kinds != b.kinds or a.times.shape != b.times.shape:
        raise ValueError("trajectories were built on different schedules")
    return float(np.abs(a.states - b.states).max())
