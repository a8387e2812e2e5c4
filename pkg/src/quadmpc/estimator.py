"""Disturbance identification from one-step prediction residuals.

Each control step yields an instantaneous wrench estimate from the exact
affine model; a sliding window of those estimates is decomposed into a
static offset (window mean) plus, per channel, a single dominant sinusoid
found by periodogram search and refined by linear least squares.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dynamics import N_STATES, N_XI, DiscreteModel, Disturbance, State
from .errors import (
    DimensionMismatch,
    EmptyWindow,
    InsufficientWindow,
    NonMonotonicTime,
    RankDeficient,
)

XI_COLUMNS = ("xi_fx", "xi_fy", "xi_fz", "xi_tx", "xi_ty", "xi_tz")

MODE_OFF = "off"
MODE_STATIC = "static"
MODE_PERIODIC = "periodic"
MODES = (MODE_OFF, MODE_STATIC, MODE_PERIODIC)


def _default_weight():
    return np.eye(N_XI)


def _default_threshold():
    # 1 N on force channels, 0.1 N*m on torque channels.
    return np.array([1.0, 1.0, 1.0, 0.1, 0.1, 0.1])


@dataclass
class EstimatorConfig:
    """Window, frequency grid and decision thresholds.

    dt matches the control rate: one residual sample per MPC step.  The
    window must span at least two periods of the slowest grid frequency,
    so the defaults pair f_min = 0.25 Hz with a 9 s window.  weight is the
    S matrix applied to the 12-dim one-step residual.
    """

    weight: np.ndarray = field(default_factory=_default_weight)
    window: int = 300
    dt: float = 0.03
    f_min: float = 0.25
    f_max: float = 2.0
    df: float = 0.01
    min_amplitude: np.ndarray = field(default_factory=_default_threshold)
    refit_interval: float = 0.1
    static_freeze_time: float = 6.0
    continuous_static: bool = False

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=float)
        if self.weight.shape != (N_XI, N_XI):
            raise DimensionMismatch("weight must be a 6x6 matrix")
        if np.any(np.linalg.eigvalsh(self.weight) <= 0.0):
            raise ValueError("weight matrix must be positive definite")
        self.min_amplitude = np.asarray(self.min_amplitude, dtype=float)
        if self.min_amplitude.shape != (N_XI,):
            raise DimensionMismatch("min_amplitude must have 6 entries")
        if not 0.0 < self.f_min < self.f_max:
            raise ValueError("need 0 < f_min < f_max")
        if self.df <= 0.0 or self.dt <= 0.0:
            raise ValueError("df and dt must be positive")
        need = 2 * int(np.ceil(1.0 / (self.f_min * self.dt)))
        if self.window < need:
            raise ValueError(
                f"window of {self.window} samples cannot span two periods of "
                f"f_min = {self.f_min} Hz at dt = {self.dt}; need >= {need}"
            )

    def frequency_grid(self) -> np.ndarray:
        return np.arange(self.f_min, self.f_max + self.df / 2.0, self.df)


class ResidualHistory:
    """Sliding window of timestamped instantaneous wrench estimates."""

    def __init__(self, window: int):
        if window < 1:
            raise ValueError("window must hold at least one sample")
        self.window = window
        self._t = deque(maxlen=window)
        self._xi = deque(maxlen=window)

    def __len__(self) -> int:
        return len(self._t)

    def push(self, t: float, xi) -> None:
        if isinstance(xi, Disturbance):
            xi = xi.to_vector()
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (N_XI,):
            raise DimensionMismatch(f"xi must have shape (6,), got {xi.shape}")
        if self._t and t <= self._t[-1]:
            raise NonMonotonicTime(f"sample at t = {t} does not follow {self._t[-1]}")
        self._t.append(float(t))
        self._xi.append(xi.copy())

    def arrays(self):
        return np.array(self._t), np.array(self._xi)

    @property
    def span(self) -> float:
        if not self._t:
            return 0.0
        return self._t[-1] - self._t[0]

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("t",) + XI_COLUMNS)
            for t, xi in zip(self._t, self._xi):
                writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in xi])


def estimate_instant(
    x_next: State, x: State, u, model: DiscreteModel, weight=None
) -> Disturbance:
    """Closed-form weighted least squares on the one-step residual.

    Solves (Q' S Q) xi = Q' S (x_next - A x - B u - G); exact whenever the
    transition was generated by the model itself.  S is 6x6 and weights
    the angular/linear velocity rows, the only rows the disturbance can
    reach within one step; the attitude/position residual rows carry no
    information about xi and are ignored.
    """
    if weight is None:
        weight = np.eye(N_XI)
    weight = np.asarray(weight, dtype=float)
    if weight.shape != (N_XI, N_XI):
        raise DimensionMismatch("weight must be a 6x6 matrix")
    u = np.asarray(u, dtype=float)
    if u.shape != (3 * model.contact_count,):
        raise DimensionMismatch(
            f"u must have shape ({3 * model.contact_count},), got {u.shape}"
        )

    resid = x_next.to_vector() - model.A_d @ x.to_vector() - model.G_d
    if model.contact_count > 0:
        resid = resid - model.B_d @ u

    q_dyn = model.Q_d[N_XI:, :]  # rows 6..12: (omega, v)
    qs = q_dyn.T @ weight
    normal = qs @ q_dyn
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > 1e12:
        raise RankDeficient(f"normal equations condition number {cond:.3g}")
    xi = np.linalg.solve(normal, qs @ resid[N_XI:])
    return Disturbance.from_vector(xi)


def fit_static(history: ResidualHistory) -> np.ndarray:
    """Window mean of the residual estimates, one value per channel."""
    if len(history) == 0:
        raise EmptyWindow("no residual samples to average")
    _, xi = history.arrays()
    return xi.mean(axis=0)


@dataclass
class PeriodicModel:
    """Static offset plus per-channel sinusoid d + A sin(2 pi f t + phi)."""

    d_static: np.ndarray
    amplitude: np.ndarray
    frequency: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        for name in ("d_static", "amplitude", "frequency", "phase"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (N_XI,):
                raise DimensionMismatch(f"{name} must have 6 entries")
            setattr(self, name, v)

    @classmethod
    def static_only(cls, d_static) -> "PeriodicModel":
        z = np.zeros(N_XI)
        return cls(np.asarray(d_static, dtype=float), z.copy(), z.copy(), z.copy())


def fit_periodic(history: ResidualHistory, config: EstimatorConfig) -> PeriodicModel:
    """Periodogram argmax per channel, then least squares at the peak.

    Channels whose fitted amplitude stays below the per-channel threshold
    collapse to purely static (A = f = phi = 0).
    """
    if len(history) == 0:
        raise EmptyWindow("no residual samples to fit")
    t, xi = history.arrays()
    span = t[-1] - t[0] + config.dt
    if span < 2.0 / config.f_min - 1e-9:
        raise InsufficientWindow(
            f"window spans {span:.3f} s, need {2.0 / config.f_min:.3f} s "
            f"for f_min = {config.f_min} Hz"
        )

    d_static = xi.mean(axis=0)
    y = xi - d_static
    grid = config.frequency_grid()
    ang = 2.0 * np.pi * grid[:, None] * t[None, :]
    cos_t = np.cos(ang)
    sin_t = np.sin(ang)
    power = (cos_t @ y) ** 2 + (sin_t @ y) ** 2  # (n_freq, 6)

    amplitude = np.zeros(N_XI)
    frequency = np.zeros(N_XI)
    phase = np.zeros(N_XI)
    for c in range(N_XI):
        f_star = grid[int(np.argmax(power[:, c]))]
        design = np.column_stack(
            [np.sin(2.0 * np.pi * f_star * t), np.cos(2.0 * np.pi * f_star * t)]
        )
        (a, b), *_ = np.linalg.lstsq(design, y[:, c], rcond=None)
        amp = float(np.hypot(a, b))
        if amp < config.min_amplitude[c]:
            continue
        amplitude[c] = amp
        frequency[c] = f_star
        phase[c] = float(np.arctan2(b, a)) % (2.0 * np.pi)
    return PeriodicModel(d_static, amplitude, frequency, phase)


def forecast(model: PeriodicModel, t0: float, k: int, dt: float, mode: str) -> np.ndarray:
    """Per-step disturbance prediction over the horizon, shape (k, 6)."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if k < 1 or dt <= 0.0:
        raise ValueError("need k >= 1 and dt > 0")
    if mode == MODE_OFF:
        return np.zeros((k, N_XI))
    if mode == MODE_STATIC:
        return np.tile(model.d_static, (k, 1))
    tt = t0 + np.arange(k) * dt
    arg = 2.0 * np.pi * model.frequency[None, :] * tt[:, None] + model.phase[None, :]
    return model.d_static[None, :] + model.amplitude[None, :] * np.sin(arg)


class DisturbancePolicy:
    """Per-episode compensation state: window, refit cadence, warm-up, freeze.

    In periodic mode the fit degrades to the running mean until the window
    spans two periods of the slowest grid frequency.  In static mode the
    estimate freezes once static_freeze_time has passed (unless the
    continuous_static flag keeps the running mean live).
    """

    def __init__(self, config: EstimatorConfig, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.config = config
        self.mode = mode
        self.history = ResidualHistory(config.window)
        self.model: PeriodicModel | None = None
        self._last_fit: float | None = None
        self._frozen = False

    @property
    def warmup_done(self) -> bool:
        return self.history.span + self.config.dt >= 2.0 / self.config.f_min - 1e-9

    def ingest(self, t: float, xi) -> None:
        self.history.push(t, xi)

    def update(self, t: float) -> None:
        """Refit at the configured cadence; cheap no-op otherwise."""
        if self.mode == MODE_OFF or len(self.history) == 0:
            return
        if self._frozen:
            return
        if self._last_fit is not None and t - self._last_fit < self.config.refit_interval:
            return
        self._last_fit = t
        if self.mode == MODE_PERIODIC and self.warmup_done:
            self.model = fit_periodic(self.history, self.config)
        else:
            self.model = PeriodicModel.static_only(fit_static(self.history))
        if (
            self.mode == MODE_STATIC
            and not self.config.continuous_static
            and t >= self.config.static_freeze_time
        ):
            self._frozen = True

    def horizon_forecast(self, t0: float, k: int, dt: float) -> np.ndarray:
        if self.mode == MODE_OFF or self.model is None:
            return np.zeros((k, N_XI))
        return forecast(self.model, t0, k, dt, self.mode)
