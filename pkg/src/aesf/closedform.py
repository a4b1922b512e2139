"""Closed-form finite-n expected sensitivity and its large-n limits.

These are the analytic oracles the Monte Carlo engine is validated against.
Every expectation is evaluated by Gaussian quadrature on rules from
``aesf.models``; nothing here is stochastic, and unsupported
(functional, model) pairs raise instead of silently approximating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError, UnsupportedError
from .estimators import FunctionalId, as_functional, phi_derivative
from .models import (
    AdditiveNoise,
    BivariateGaussian,
    FEATURE_HALF_WIDTH,
    IndependentProduct,
    Model,
    UniformMax,
    UnivariateNormal,
    conditional_location,
    conditional_survival,
    expect_y_prime,
    marginal_cdf_x,
    marginal_cdf_y,
    plain_law_rule,
    x_expectation_rule,
)
from .numerics import bvn_cdf, hermite_rule, normal_cdf, phi

__all__ = ["AesfRequest", "esf_exact", "aesf", "population_value", "is_supported"]


@dataclass(frozen=True)
class AesfRequest:
    """A (functional, model, point) triple for closed-form evaluation."""

    functional: FunctionalId
    model: Model
    point: object

    def __post_init__(self):
        object.__setattr__(self, "functional", as_functional(self.functional))


_AESF_SUPPORT = {
    "mean": (UnivariateNormal, UniformMax),
    "variance": (UnivariateNormal, UniformMax),
    "uniform_max": (UniformMax,),
    "kendall": (BivariateGaussian, AdditiveNoise),
    "spearman": (BivariateGaussian, IndependentProduct),
    "chatterjee": (BivariateGaussian, AdditiveNoise, IndependentProduct),
    "phi_linear": (UnivariateNormal,),
}


def is_supported(f, model: Model) -> bool:
    f = as_functional(f)
    return isinstance(model, _AESF_SUPPORT.get(f.tag, ()))


def _require_supported(f: FunctionalId, model: Model) -> None:
    if not is_supported(f, model):
        raise UnsupportedError(
            f"no closed form for functional {f.tag!r} under {type(model).__name__}")


def _scalar_point(point) -> float:
    if np.ndim(point) != 0:
        raise DomainError("this functional takes a scalar evaluation point")
    return float(point)


def _pair_point(point) -> tuple[float, float]:
    try:
        x, y = point
    except TypeError:
        raise DomainError("rank correlations take an (x, y) evaluation point") from None
    return float(x), float(y)


def _mean_var(model: Model) -> tuple[float, float]:
    if isinstance(model, UnivariateNormal):
        return model.mu, model.sigma ** 2
    if isinstance(model, UniformMax):
        return 0.5 * model.theta, model.theta ** 2 / 12.0
    raise UnsupportedError(f"{type(model).__name__} has no stored mean/variance")


def _g_moment(f: FunctionalId, model: UnivariateNormal) -> float:
    """E[g(X)] for the phi-linear inner map under N(mu, sigma^2)."""
    if f.g == "identity":
        return model.mu
    return model.mu ** 2 + model.sigma ** 2


def _g_at(f: FunctionalId, x: float) -> float:
    return x if f.g == "identity" else x * x


# ---------------------------------------------------------------------------
# Exact finite-n expected sensitivity
# ---------------------------------------------------------------------------

def esf_exact(f, model: Model, point, n: int) -> float:
    """Exact ESF at sample size n for mean, variance and uniform-max.

    mean:        x - mu                                   (no n dependence)
    variance:    n/(n+1) (x^2 - 2 x mu + mu^2)
                 - (n^2 - n - 1)/(n (n+1)) sigma^2
    uniform-max: x (x / theta)^n on 0 <= x <= theta
    """
    f = as_functional(f)
    if f.tag not in ("mean", "variance", "uniform_max"):
        raise UnsupportedError(f"no exact finite-n ESF for functional {f.tag!r}")
    if n < 1:
        raise DomainError("sample size must be >= 1")
    x = _scalar_point(point)
    if f.tag == "mean":
        mu, _ = _mean_var(model)
        return x - mu
    if f.tag == "variance":
        mu, var = _mean_var(model)
        a = n / (n + 1.0)
        return a * x * x - 2.0 * a * x * mu + a * mu * mu \
            - (n * n - n - 1.0) / (n * (n + 1.0)) * var
    # uniform_max
    if not isinstance(model, UniformMax):
        raise UnsupportedError("uniform_max ESF needs a UniformMax model")
    if not 0.0 <= x <= model.theta:
        raise DomainError(f"x must lie in [0, {model.theta}], got {x}")
    return x * (x / model.theta) ** n


# ---------------------------------------------------------------------------
# Kendall
# ---------------------------------------------------------------------------

def _aesf_kendall_gaussian(rho: float, x: float, y: float, order: int) -> float:
    # 4 P[(X-x)(Y-y) > 0] - 2 - 2 tau with the quadrant probability written
    # through the bivariate normal CDF. The limit of the expected sensitivity
    # carries twice the population correlation: the estimator is a U-statistic
    # over pairs, so the grown-sample average sheds two pair-kernels' worth of
    # tau per inserted point (Monte Carlo runs pin this factor; see the
    # exact-identity tests).
    return (8.0 * bvn_cdf(x, y, rho, order=order)
            - 4.0 * normal_cdf(x) - 4.0 * normal_cdf(y)
            + 2.0 - (4.0 / math.pi) * math.asin(rho))


def _quadrant_probability(model: AdditiveNoise, x: float, y: float, order: int) -> float:
    """P[(X - x)(Y - y) > 0] = P(X > x, Y > y) + P(X < x, Y < y)."""
    nodes, weights = x_expectation_rule(model, levels=[y], cuts=[x], order=order)
    surv = conditional_survival(model, y, nodes)
    above = nodes > x
    return float(weights[above] @ surv[above]
                 + weights[~above] @ (1.0 - surv[~above]))


@lru_cache(maxsize=128)
def _tau_additive(model: AdditiveNoise, order: int) -> float:
    """Population Kendall correlation by double quadrature.

    tau = 2 * E[ 1(X > X') (2 Phi((g(X) - g(X')) / (sqrt(2) sigma)) - 1) ],
    using that Y - Y' given (X, X') is N(g(X) - g(X'), 2 sigma^2).
    """
    root2 = math.sqrt(2.0)
    outer_nodes, outer_weights = x_expectation_rule(model, order=order)
    lo = model.x_law.support()[0]
    total = 0.0
    for t, wt in zip(outer_nodes, outer_weights):
        if t <= lo:
            continue
        inner_nodes, inner_weights = x_expectation_rule(
            model, levels=[float(model.link(t))], cuts=[t], order=order,
            half_width=FEATURE_HALF_WIDTH * root2)
        keep = inner_nodes < t
        kernel = 2.0 * phi((model.link(t) - model.link(inner_nodes[keep]))
                           / (root2 * model.noise_sigma)) - 1.0
        total += wt * float(inner_weights[keep] @ kernel)
    return 2.0 * total


# ---------------------------------------------------------------------------
# Spearman
# ---------------------------------------------------------------------------

def _aesf_spearman_gaussian(rho: float, x: float, y: float, order: int) -> float:
    rule = hermite_rule(order)
    t = rule.nodes
    scale = math.sqrt(1.0 - rho * rho)
    cross_y = float(rule.weights @ (phi(t) * phi((rho * t - y) / scale)))
    cross_x = float(rule.weights @ (phi(t) * phi((rho * t - x) / scale)))
    return (12.0 * normal_cdf(x) * normal_cdf(y)
            + 12.0 * (cross_y + cross_x)
            - (18.0 / math.pi) * math.asin(0.5 * rho) - 9.0)


def _aesf_spearman_independent(model: IndependentProduct, x: float, y: float,
                               order: int) -> float:
    # E[F_X(X) 1(Y >= y)] factorizes as E[F_X(X)] P(Y >= y) under independence;
    # the two mean ranks are evaluated by quadrature rather than assumed 1/2.
    fx, fy = float(marginal_cdf_x(model, x)), float(model.y_law.cdf(y))
    xn, xw = plain_law_rule(model.x_law, order)
    yn, yw = plain_law_rule(model.y_law, order)
    mean_fx = float(xw @ model.x_law.cdf(xn))
    mean_fy = float(yw @ model.y_law.cdf(yn))
    return (12.0 * fx * fy
            + 12.0 * mean_fx * (1.0 - fy)
            + 12.0 * mean_fy * (1.0 - fx)
            - 9.0)  # population Spearman correlation is 0 under independence


# ---------------------------------------------------------------------------
# Chatterjee: four conditional-survival terms
# ---------------------------------------------------------------------------

def _w_moments(model: Model, t: float, order: int) -> tuple[float, float]:
    """(E_X[P(Y > t | X)], E_X[P(Y > t | X)^2]) with a t-refined x rule."""
    nodes, weights = x_expectation_rule(model, levels=[t], order=order)
    s = conditional_survival(model, t, nodes)
    return float(weights @ s), float(weights @ (s * s))


def _w2_array(model: Model, ts: np.ndarray, order: int) -> np.ndarray:
    flat = np.asarray(ts, dtype=float).ravel()
    out = np.array([_w_moments(model, float(t), order)[1] for t in flat])
    return out.reshape(np.shape(ts))


@lru_cache(maxsize=128)
def _chatterjee_shared_term(model: Model, order: int) -> float:
    """E_{Y'} E_X [ P(Y > Y' | X)^2 ]; independent of the evaluation point."""
    return expect_y_prime(model, lambda ts: _w2_array(model, ts, order), order=order)


def _sharp_levels_at(model: Model, x: float) -> tuple[float, ...]:
    if isinstance(model, IndependentProduct):
        return ()
    return (float(conditional_location(model, x)),)


def _aesf_chatterjee(model: Model, x: float, y: float, order: int) -> float:
    surv_at_x = lambda ts: conditional_survival(model, ts, x)
    t1 = _chatterjee_shared_term(model, order)
    t2 = _w_moments(model, y, order)[1]
    t3 = expect_y_prime(model, lambda ts: surv_at_x(ts) ** 2,
                        sharp_levels=_sharp_levels_at(model, x), order=order)
    t4 = expect_y_prime(model, surv_at_x, upper=y,
                        sharp_levels=_sharp_levels_at(model, x), order=order)
    return -12.0 * t1 + 6.0 * t2 - 6.0 * t3 + 12.0 * t4


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def aesf(request: AesfRequest, order: int = 64) -> float:
    """Asymptotic expected sensitivity at the request's evaluation point."""
    f, model = request.functional, request.model
    _require_supported(f, model)

    if f.tag in ("mean", "variance"):
        x = _scalar_point(request.point)
        mu, var = _mean_var(model)
        return x - mu if f.tag == "mean" else (x - mu) ** 2 - var

    if f.tag == "uniform_max":
        x = _scalar_point(request.point)
        theta = model.theta
        if not 0.0 <= x <= theta:
            raise DomainError(f"x must lie in [0, {theta}], got {x}")
        return theta if x == theta else 0.0

    if f.tag == "phi_linear":
        x = _scalar_point(request.point)
        eg = _g_moment(f, model)
        return (_g_at(f, x) - eg) * phi_derivative(f.phi, eg)

    x, y = _pair_point(request.point)

    if f.tag == "kendall":
        if isinstance(model, BivariateGaussian):
            return _aesf_kendall_gaussian(model.rho, x, y, order)
        p = _quadrant_probability(model, x, y, order)
        return 4.0 * p - 2.0 - 2.0 * _tau_additive(model, order)

    if f.tag == "spearman":
        if isinstance(model, BivariateGaussian):
            return _aesf_spearman_gaussian(model.rho, x, y, order)
        return _aesf_spearman_independent(model, x, y, order)

    return _aesf_chatterjee(model, x, y, order)


@lru_cache(maxsize=128)
def _xi_dss(model: Model, order: int) -> float:
    """Rank-correlation limit as a ratio of variance integrals.

    numerator:   E_{Y'}[ Var_X(P(Y > Y' | X)) ]
    denominator: E_{Y'}[ F_Y(Y') (1 - F_Y(Y')) ]
    """
    def num(ts):
        flat = np.asarray(ts, dtype=float).ravel()
        vals = []
        for t in flat:
            w1, w2 = _w_moments(model, float(t), order)
            vals.append(w2 - w1 * w1)
        return np.array(vals).reshape(np.shape(ts))

    def den(ts):
        flat = np.asarray(ts, dtype=float).ravel()
        cdf = np.array([marginal_cdf_y(model, float(t), order) for t in flat])
        return (cdf * (1.0 - cdf)).reshape(np.shape(ts))

    return expect_y_prime(model, num, order=order) / expect_y_prime(model, den, order=order)


def population_value(f, model: Model, order: int = 64) -> float:
    """Population value of a rank correlation under the given model."""
    f = as_functional(f)
    if f.tag not in ("kendall", "spearman", "chatterjee"):
        raise UnsupportedError(f"no population value for functional {f.tag!r}")
    if isinstance(model, IndependentProduct):
        return 0.0
    if f.tag == "kendall":
        if isinstance(model, BivariateGaussian):
            return (2.0 / math.pi) * math.asin(model.rho)
        if isinstance(model, AdditiveNoise):
            return _tau_additive(model, order)
    if f.tag == "spearman" and isinstance(model, BivariateGaussian):
        return (6.0 / math.pi) * math.asin(0.5 * model.rho)
    if f.tag == "chatterjee" and isinstance(model, (BivariateGaussian, AdditiveNoise)):
        return _xi_dss(model, order)
    raise UnsupportedError(
        f"no population value for {f.tag!r} under {type(model).__name__}")
