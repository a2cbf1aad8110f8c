"""Estimator assembly, corrected stepping, reference solves, and adaptivity.

The glue layer: bundles a stepper and its defect evaluator into a
:class:`Method`, turns defects into local error estimates and corrected
states, provides high-accuracy reference solutions, a quadrature oracle for
the integral representations of the local error, and the classic
proportional step-size controller.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .defects import (
    cfm_defect,
    expmid_defect,
    imr_defect,
    magnus4_defect,
    splitting_defect_nonlinear,
    splitting_defect_semilinear,
    strang_defect,
)
from .errors import ConvergenceFailure, StepFailure
from .schemes import (
    CF4,
    EMB43AKS,
    STRANG,
    step_cfm,
    step_exp_midpoint,
    step_implicit_midpoint,
    step_magnus4,
    step_splitting,
)

__all__ = [
    "StepOutput",
    "state_norm",
    "estimate_and_correct",
    "Method",
    "make_method",
    "METHOD_NAMES",
    "reference_solve",
    "local_error_integral_oracle",
    "AdaptiveConfig",
    "StepRecord",
    "propose_step",
    "adaptive_integrate",
]


def state_norm(problem, v):
    """Norm used for error measurement: the 2-norm scaled by the problem's
    norm weight (sqrt of the mesh width for collocated PDEs, 1 otherwise)."""
    return getattr(problem, "norm_weight", 1.0) * float(np.linalg.norm(v))


@dataclass(frozen=True)
class StepOutput:
    """One step's result; estimator and corrected state are filled in by
    :func:`estimate_and_correct`."""

    tau: float
    u_next: np.ndarray
    defect: Optional[np.ndarray] = None
    estimator: Optional[np.ndarray] = None
    u_corrected: Optional[np.ndarray] = None


def estimate_and_correct(step, order):
    """Attach the defect-based estimator tau/(p+1) * d and the corrected
    state u_next - estimator to a step that carries its defect."""
    if step.defect is None:
        raise ValueError("step carries no defect")
    estimator = (step.tau / (order + 1)) * step.defect
    return replace(step, estimator=estimator, u_corrected=step.u_next - estimator)


@dataclass(frozen=True)
class Method:
    """A stepper with a matching defect evaluator and declared order.

    Both callables take (problem, t0, tau, u); autonomous steppers ignore
    t0. ``step_with_defect`` returns a :class:`DefectOutput`.
    """

    name: str
    order: int
    step: Callable
    step_with_defect: Callable


METHOD_NAMES = ("imr", "strang", "emb43aks", "expmid", "cf4", "magnus4")


def make_method(name, defect="symmetrized", variant="hermite"):
    """Build a :class:`Method` by scheme name.

    ``defect`` picks classical vs symmetrized where both exist (implicit
    midpoint, Strang); ``variant`` picks the Taylor vs Hermite evaluation
    for the exponential integrators. Splitting methods route to the
    semilinear defect algorithm when the problem exposes a linear A-part
    (``apply_A``) and to the general nonlinear one otherwise.
    """
    if name == "imr":
        return Method(
            "imr",
            2,
            lambda problem, t0, tau, u: step_implicit_midpoint(problem, tau, u),
            lambda problem, t0, tau, u: imr_defect(problem, tau, u, kind=defect),
        )
    if name == "strang":

        def strang_swd(problem, t0, tau, u):
            if defect == "symmetrized" and not hasattr(problem, "apply_A"):
                return splitting_defect_nonlinear(STRANG, problem, tau, u)
            return strang_defect(problem, tau, u, kind=defect)

        return Method(
            "strang",
            2,
            lambda problem, t0, tau, u: step_splitting(STRANG, problem, tau, u),
            strang_swd,
        )
    if name == "emb43aks":
        if defect != "symmetrized":
            raise ValueError("only the symmetrized defect is available for emb43aks")

        def emb_swd(problem, t0, tau, u):
            if hasattr(problem, "apply_A"):
                return splitting_defect_semilinear(EMB43AKS, problem, tau, u)
            return splitting_defect_nonlinear(EMB43AKS, problem, tau, u)

        return Method(
            "emb43aks",
            4,
            lambda problem, t0, tau, u: step_splitting(EMB43AKS, problem, tau, u),
            emb_swd,
        )
    if name == "expmid":
        if defect != "symmetrized":
            raise ValueError("only the symmetrized defect is available for expmid")
        return Method(
            "expmid",
            2,
            lambda problem, t0, tau, u: step_exp_midpoint(problem, t0, tau, u),
            lambda problem, t0, tau, u: expmid_defect(problem, t0, tau, u),
        )
    if name == "cf4":
        if defect != "symmetrized":
            raise ValueError("only the symmetrized defect is available for cf4")
        return Method(
            "cf4",
            4,
            lambda problem, t0, tau, u: step_cfm(CF4, problem, t0, tau, u),
            lambda problem, t0, tau, u: cfm_defect(
                CF4, problem, t0, tau, u, variant=variant
            ),
        )
    if name == "magnus4":
        if defect != "symmetrized":
            raise ValueError("only the symmetrized defect is available for magnus4")
        return Method(
            "magnus4",
            4,
            lambda problem, t0, tau, u: step_magnus4(problem, t0, tau, u),
            lambda problem, t0, tau, u: magnus4_defect(
                problem, t0, tau, u, variant=variant
            ),
        )
    raise ValueError(f"unknown method {name!r}; choose from {METHOD_NAMES}")


def _default_reference_method(problem):
    # highest-order corrected scheme the problem's interface supports
    if hasattr(problem, "A"):
        return make_method("magnus4", variant="hermite")
    if hasattr(problem, "flow_B"):
        return make_method("emb43aks")
    return make_method("imr")


def corrected_run(problem, method, t0, t_end, u0, steps):
    """Fixed-step integration propagating the corrected state each step."""
    tau = (t_end - t0) / steps
    u = np.asarray(u0, dtype=np.complex128)
    for i in range(steps):
        u_next, d = method.step_with_defect(problem, t0 + i * tau, tau, u)
        u = u_next - (tau / (method.order + 1)) * d
    return u


def reference_solve(
    problem, t0, t_end, u0, tol=1e-12, method=None, use_exact=True, max_levels=20
):
    """High-accuracy solution of the problem at t_end.

    When the problem knows a closed-form solution (and, for time-anchored
    ones, u0 is the problem's own initial state), the closed form is
    sampled; ``use_exact=False`` disables this shortcut. Otherwise the
    interval is integrated with the highest-order available corrected
    scheme, doubling the step count until two consecutive answers differ by
    less than tol, and the finer answer is returned.
    """
    u0 = np.asarray(u0, dtype=np.complex128)
    if t_end == t0:
        return u0.copy()
    if use_exact and method is None:
        if hasattr(problem, "exact_solution"):
            return problem.exact_solution(t_end - t0, u0)
        if (
            hasattr(problem, "exact_state")
            and getattr(problem, "initial", None) == "soliton"
            and np.array_equal(u0, problem.initial_state())
        ):
            return problem.exact_state(t_end)
    method = method or _default_reference_method(problem)
    steps = 1
    previous = None
    for _ in range(max_levels):
        current = corrected_run(problem, method, t0, t_end, u0, steps)
        if previous is not None and state_norm(problem, current - previous) < tol:
            return current
        previous = current
        steps *= 2
    raise ConvergenceFailure(
        f"reference solve did not converge to {tol:g} within {max_levels} halvings"
    )


# -- integral representations of the local error ------------------------------


def _rk4(rhs, y, duration, steps):
    h = duration / steps
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def exact_flow_rk4(problem, duration, u, steps=512):
    """Flow of u' = F(u) by fixed-step RK4 (oracle-grade accuracy)."""
    if duration == 0.0:
        return np.asarray(u, dtype=np.complex128).copy()
    return _rk4(problem.f, np.asarray(u, dtype=np.complex128), duration, steps)


def flow_derivative_apply(problem, duration, u, v, steps=512):
    """Transport of a tangent vector by the derivative of the exact flow:
    integrates the variational equation v' = F'(y) v alongside y' = F(y)."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if duration == 0.0:
        return v.copy()
    n = u.shape[0]

    def rhs(pair):
        y, w = pair[:n], pair[n:]
        return np.concatenate((problem.f(y), problem.df(y, w)))

    out = _rk4(rhs, np.concatenate((u, v)), duration, steps)
    return out[n:]


def local_error_integral_oracle(
    problem, method, tau, u0, kind="symmetrized", quad_nodes=48, ode_steps=512
):
    """Quadrature evaluation of the integral representation of the local
    error in terms of the defect (validation oracle, small problems only).

    classical:    int_0^tau dE(tau - s, S(s, u0)) . D(s, u0) ds
    symmetrized:  int_0^tau dE(h, S(s, E(h, u0))) . D(s, E(h, u0)) ds,
                  h = (tau - s)/2

    where dE is the derivative of the exact flow with respect to the state,
    applied by integrating the variational equation. The method's defect
    evaluator must produce the matching defect kind.
    """
    if kind not in ("classical", "symmetrized"):
        raise ValueError(f"unknown kind {kind!r}")
    u0 = np.asarray(u0, dtype=np.complex128)
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    # map from [-1, 1] to [0, tau]
    points = 0.5 * tau * (nodes + 1.0)
    scale = 0.5 * tau
    total = np.zeros_like(u0)
    for s, w in zip(points, weights):
        if kind == "classical":
            _, d = method.step_with_defect(problem, 0.0, s, u0)
            y = method.step(problem, 0.0, s, u0)
            term = flow_derivative_apply(problem, tau - s, y, d, steps=ode_steps)
        else:
            half = 0.5 * (tau - s)
            x = exact_flow_rk4(problem, half, u0, steps=ode_steps)
            y, d = method.step_with_defect(problem, 0.0, s, x)
            term = flow_derivative_apply(problem, half, y, d, steps=ode_steps)
        total = total + (w * scale) * term
    return total


# -- adaptive step-size control ------------------------------------------------


@dataclass(frozen=True)
class AdaptiveConfig:
    """Settings of the proportional controller. ``tol`` bounds the 2-norm of
    the local error estimate per step."""

    tol: float
    tau_init: float
    tau_min: float = 1e-10
    tau_max: float = 1.0
    safety: float = 0.9
    ratio_min: float = 0.25
    ratio_max: float = 4.0

    def __post_init__(self):
        if not 0.0 < self.ratio_min < 1.0 < self.ratio_max:
            raise ValueError("need 0 < ratio_min < 1 < ratio_max")
        if not self.tau_min <= self.tau_init <= self.tau_max:
            raise ValueError("need tau_min <= tau_init <= tau_max")
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class StepRecord:
    t: float
    tau: float
    est_norm: float
    accepted: bool


def propose_step(tau, err, tol, order, config):
    """Next step size of the classic controller:
    tau * clamp(safety * (tol/err)^(1/(p+1)), ratio_min, ratio_max),
    clamped into [tau_min, tau_max]."""
    if err == 0.0:
        ratio = config.ratio_max
    else:
        ratio = config.safety * (tol / err) ** (1.0 / (order + 1))
        ratio = min(max(ratio, config.ratio_min), config.ratio_max)
    return min(max(tau * ratio, config.tau_min), config.tau_max)


def adaptive_integrate(problem, method, config, t0, t_end, u0):
    """Adaptive integration from t0 to t_end.

    Each trial step is accepted when the estimator norm is at most tol and
    redone with the proposed smaller step otherwise; the final step is
    clamped to land on t_end exactly. Returns the final state and the full
    trace of trial steps.
    """
    u = np.asarray(u0, dtype=np.complex128)
    records = []
    t = t0
    compensation = 0.0  # Kahan accumulation keeps sum(tau) consistent with t
    tau = min(config.tau_init, t_end - t0)
    span = abs(t_end - t0)
    while t < t_end - 1e-14 * span:
        tau = min(tau, t_end - t)
        u_next, d = method.step_with_defect(problem, t, tau, u)
        err = state_norm(problem, (tau / (method.order + 1)) * d)
        accepted = err <= config.tol
        records.append(StepRecord(t, tau, err, accepted))
        tau_next = propose_step(tau, err, config.tol, method.order, config)
        if accepted:
            u = u_next
            increment = tau - compensation
            t_new = t + increment
            compensation = (t_new - t) - increment
            t = t_new
        elif tau_next >= tau or tau_next <= config.tau_min:
            raise StepFailure(
                f"controller stalled at t = {t:.6g}: err = {err:.3e} > tol with "
                f"tau already at {tau:.3e}"
            )
        tau = tau_next
    return u, records
