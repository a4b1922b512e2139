"""Data-generating laws with samplable joints and analytic conditional structure.

Every model here exposes three things the rest of the package needs:
deterministic sampling from a counter-based stream, the conditional
survival P(Y > y | X = x) in closed form, and quadrature rules for
expectations over the marginals.

Randomness contract: ``sample(model, n, seed)`` is a pure function of its
arguments. Each seed keys a Philox counter-based generator; uniforms come
from ``Generator.random`` and normal draws use the inverse CDF applied to
53-bit uniforms, so replicate streams never couple sequentially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import DomainError, ParseError, UnsupportedError
from .estimators import Dataset
from .numerics import NORMAL_TAIL, _leggauss, hermite_rule, normal_pdf

__all__ = [
    "NormalLaw",
    "UniformLaw",
    "Link",
    "BivariateGaussian",
    "AdditiveNoise",
    "UniformMax",
    "UnivariateNormal",
    "IndependentProduct",
    "Model",
    "scenario",
    "is_bivariate",
    "model_to_json",
    "model_from_json",
    "derive_seed",
    "sample",
    "conditional_survival",
    "marginal_cdf_x",
    "marginal_cdf_y",
    "expect_y_prime",
]

_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi

#: Half-width, in units of the conditional noise scale, of the region around
#: a level where a conditional-CDF kernel actually varies. ndtr saturates to
#: double precision beyond ~8.3 scales; 13 leaves comfortable margin.
FEATURE_HALF_WIDTH = 13.0


# ---------------------------------------------------------------------------
# Marginal laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalLaw:
    """Standard normal marginal."""

    def cdf(self, t):
        return ndtr(np.asarray(t, dtype=float))

    def pdf(self, t):
        return normal_pdf(t)

    def support(self) -> tuple[float, float]:
        # Truncation for quadrature only; the lost mass is ~1e-17.
        return (-NORMAL_TAIL, NORMAL_TAIL)

    def max_panel(self) -> float:
        return 3.0

    def moments(self) -> tuple[float, float]:
        return (0.0, 1.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return _standard_normals(rng, n)


@dataclass(frozen=True)
class UniformLaw:
    """Uniform marginal on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise DomainError(f"uniform law needs finite a < b, got [{self.a}, {self.b}]")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.clip((t - self.a) / (self.b - self.a), 0.0, 1.0)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.a) & (t <= self.b)
        return np.where(inside, 1.0 / (self.b - self.a), 0.0)

    def support(self) -> tuple[float, float]:
        return (self.a, self.b)

    def max_panel(self) -> float:
        return (self.b - self.a) / 4.0

    def moments(self) -> tuple[float, float]:
        return (0.5 * (self.a + self.b), (self.b - self.a) / math.sqrt(12.0))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.a + (self.b - self.a) * rng.random(n)


Law = Union[NormalLaw, UniformLaw]


# ---------------------------------------------------------------------------
# Named link functions (closed set, so conditional laws stay analytic)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Link:
    """Named regression function g for additive-noise models.

    ``linear`` (g(t) = c t, c may be 0, which makes Y independent of X),
    ``square`` (g(t) = t^2) or ``cos2pi`` (g(t) = cos(2 pi t)).
    """

    name: str
    c: Optional[float] = None

    def __post_init__(self):
        if self.name not in ("linear", "square", "cos2pi"):
            raise DomainError(f"unknown link {self.name!r}")
        if self.name == "linear":
            if self.c is None or not math.isfinite(self.c):
                raise DomainError("linear link requires a finite coefficient c")
        elif self.c is not None:
            raise DomainError(f"link {self.name!r} takes no coefficient")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.name == "linear":
            return self.c * t
        if self.name == "square":
            return t * t
        return np.cos(_TWO_PI * t)

    def preimage(self, lo: float, hi: float, xlo: float, xhi: float) -> list[tuple[float, float]]:
        """Intervals of [xlo, xhi] on which g takes values in [lo, hi]."""
        if self.name == "linear":
            if self.c == 0.0:
                return [(xlo, xhi)] if lo <= 0.0 <= hi else []
            p, q = lo / self.c, hi / self.c
            return [(min(p, q), max(p, q))]
        if self.name == "square":
            if hi < 0.0:
                return []
            r_lo = math.sqrt(max(lo, 0.0))
            r_hi = math.sqrt(hi)
            return [(-r_hi, -r_lo), (r_lo, r_hi)]
        # cos2pi: invert per monotone half-period branch [k/2, (k+1)/2]
        v_lo, v_hi = max(lo, -1.0), min(hi, 1.0)
        if v_lo > v_hi:
            return []
        out = []
        for k in range(math.floor(2 * xlo) - 1, math.ceil(2 * xhi) + 1):
            start = 0.5 * k
            if k % 2 == 0:  # decreasing branch: +1 down to -1
                out.append((start + math.acos(v_hi) / _TWO_PI,
                            start + math.acos(v_lo) / _TWO_PI))
            else:  # increasing branch: -1 up to +1
                out.append((start + math.acos(-v_lo) / _TWO_PI,
                            start + math.acos(-v_hi) / _TWO_PI))
        return out


# ---------------------------------------------------------------------------
# Model variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BivariateGaussian:
    """Standard bivariate normal with correlation strictly inside (-1, 1)."""

    rho: float

    def __post_init__(self):
        if not math.isfinite(self.rho) or not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie strictly inside (-1, 1), got {self.rho}")


@dataclass(frozen=True)
class AdditiveNoise:
    """Y = g(X) + noise_sigma * Z with Z ~ N(0,1) independent of X."""

    x_law: Law
    link: Link
    noise_sigma: float

    def __post_init__(self):
        if not math.isfinite(self.noise_sigma) or self.noise_sigma <= 0.0:
            raise DomainError("noise_sigma must be positive")


@dataclass(frozen=True)
class UniformMax:
    """Univariate U[0, theta]."""

    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta) or self.theta <= 0.0:
            raise DomainError("theta must be positive")


@dataclass(frozen=True)
class UnivariateNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)) or self.sigma <= 0.0:
            raise DomainError("need finite mu and sigma > 0")


@dataclass(frozen=True)
class IndependentProduct:
    """Independent marginals: the null model for every rank correlation."""

    x_law: Law
    y_law: Law


Model = Union[BivariateGaussian, AdditiveNoise, UniformMax, UnivariateNormal,
              IndependentProduct]

_SCENARIOS = {
    "A": lambda: AdditiveNoise(NormalLaw(), Link("linear", 0.7), math.sqrt(1.0 - 0.7 ** 2)),
    "B": lambda: AdditiveNoise(UniformLaw(-10.0, 10.0), Link("square"), math.sqrt(10.0)),
    "C": lambda: AdditiveNoise(UniformLaw(-1.0, 1.0), Link("cos2pi"), 0.5),
}


def scenario(name: str) -> AdditiveNoise:
    """The three reference correlation patterns: A linear, B quadratic, C sinusoid."""
    try:
        return _SCENARIOS[name.upper()]()
    except KeyError:
        raise DomainError(f"unknown scenario {name!r}; choose A, B or C") from None


def is_bivariate(model: Model) -> bool:
    return isinstance(model, (BivariateGaussian, AdditiveNoise, IndependentProduct))


# ---------------------------------------------------------------------------
# JSON serialization (field names are part of the CLI contract)
# ---------------------------------------------------------------------------

def _law_to_json(law: Law) -> dict:
    if isinstance(law, NormalLaw):
        return {"name": "normal"}
    return {"name": "uniform", "a": law.a, "b": law.b}


def _law_from_json(obj) -> Law:
    if not isinstance(obj, dict) or "name" not in obj:
        raise ParseError(f"law must be an object with a 'name' field, got {obj!r}")
    if obj["name"] == "normal":
        return NormalLaw()
    if obj["name"] == "uniform":
        try:
            return UniformLaw(float(obj["a"]), float(obj["b"]))
        except KeyError as e:
            raise ParseError(f"uniform law missing field {e}") from None
    raise ParseError(f"unknown law name {obj['name']!r}")


def _link_to_json(link: Link) -> dict:
    out = {"name": link.name}
    if link.c is not None:
        out["c"] = link.c
    return out


def _link_from_json(obj) -> Link:
    if not isinstance(obj, dict) or "name" not in obj:
        raise ParseError(f"link must be an object with a 'name' field, got {obj!r}")
    c = obj.get("c")
    return Link(obj["name"], None if c is None else float(c))


def model_to_json(model: Model) -> dict:
    if isinstance(model, BivariateGaussian):
        return {"variant": "bivariate_gaussian", "rho": model.rho}
    if isinstance(model, AdditiveNoise):
        return {"variant": "additive_noise", "x_law": _law_to_json(model.x_law),
                "link": _link_to_json(model.link), "noise_sigma": model.noise_sigma}
    if isinstance(model, UniformMax):
        return {"variant": "uniform_max", "theta": model.theta}
    if isinstance(model, UnivariateNormal):
        return {"variant": "univariate_normal", "mu": model.mu, "sigma": model.sigma}
    if isinstance(model, IndependentProduct):
        return {"variant": "independent_product", "x_law": _law_to_json(model.x_law),
                "y_law": _law_to_json(model.y_law)}
    raise DomainError(f"not a model: {model!r}")


def model_from_json(obj) -> Model:
    if not isinstance(obj, dict) or "variant" not in obj:
        raise ParseError("model JSON must be an object with a 'variant' field")
    variant = obj["variant"]
    try:
        if variant == "bivariate_gaussian":
            return BivariateGaussian(float(obj["rho"]))
        if variant == "additive_noise":
            return AdditiveNoise(_law_from_json(obj["x_law"]),
                                 _link_from_json(obj["link"]),
                                 float(obj["noise_sigma"]))
        if variant == "uniform_max":
            return UniformMax(float(obj["theta"]))
        if variant == "univariate_normal":
            return UnivariateNormal(float(obj["mu"]), float(obj["sigma"]))
        if variant == "independent_product":
            return IndependentProduct(_law_from_json(obj["x_law"]),
                                      _law_from_json(obj["y_law"]))
    except KeyError as e:
        raise ParseError(f"model JSON missing field {e}") from None
    except (TypeError, ValueError) as e:
        raise ParseError(f"bad model JSON: {e}") from None
    raise ParseError(f"unknown model variant {variant!r}")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def derive_seed(seed: int, replicate: int, attempt: int = 0) -> int:
    """64-bit stream seed for one replicate, independent of all others.

    Hashing (seed, replicate, attempt) through SeedSequence keeps replicate
    streams uncoupled, so Monte Carlo runs can execute replicates in any
    order or in parallel and still aggregate deterministically.
    """
    ss = np.random.SeedSequence(entropy=[int(seed) & _MASK64, int(replicate), int(attempt)])
    return int(ss.generate_state(1, np.uint64)[0])


def _rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def _standard_normals(rng: np.random.Generator, n: int) -> np.ndarray:
    # Inverse CDF on (k + 1/2) / 2^53 uniforms: strictly inside (0, 1).
    k = rng.integers(0, 1 << 53, size=n, dtype=np.int64)
    return ndtri((k + 0.5) * 2.0 ** -53)


def sample(model: Model, n: int, seed: int) -> Dataset:
    """n i.i.d. draws from the model, a pure function of (model, n, seed).

    Draw order is fixed per variant (x stream first, then the y/noise
    stream) so that sampled values are reproducible bit for bit.
    """
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    rng = _rng_for(seed)
    if isinstance(model, UnivariateNormal):
        return Dataset(model.mu + model.sigma * _standard_normals(rng, n))
    if isinstance(model, UniformMax):
        return Dataset(model.theta * rng.random(n))
    if isinstance(model, BivariateGaussian):
        zx = _standard_normals(rng, n)
        zy = _standard_normals(rng, n)
        return Dataset(zx, model.rho * zx + math.sqrt(1.0 - model.rho ** 2) * zy)
    if isinstance(model, AdditiveNoise):
        xs = model.x_law.sample(rng, n)
        noise = _standard_normals(rng, n)
        return Dataset(xs, model.link(xs) + model.noise_sigma * noise)
    if isinstance(model, IndependentProduct):
        xs = model.x_law.sample(rng, n)
        ys = model.y_law.sample(rng, n)
        return Dataset(xs, ys)
    raise DomainError(f"not a model: {model!r}")


# ---------------------------------------------------------------------------
# Conditional structure
# ---------------------------------------------------------------------------

def _require_bivariate(model: Model, what: str) -> None:
    if not is_bivariate(model):
        raise UnsupportedError(f"{what} requires a bivariate model, got {type(model).__name__}")


def conditional_location(model: Model, x):
    """E[Y | X = x] for models with additive conditional structure."""
    if isinstance(model, BivariateGaussian):
        return model.rho * np.asarray(x, dtype=float)
    if isinstance(model, AdditiveNoise):
        return model.link(x)
    raise UnsupportedError(f"{type(model).__name__} has no conditional location")


def conditional_scale(model: Model) -> float:
    """Conditional standard deviation of Y given X."""
    if isinstance(model, BivariateGaussian):
        return math.sqrt(1.0 - model.rho ** 2)
    if isinstance(model, AdditiveNoise):
        return model.noise_sigma
    raise UnsupportedError(f"{type(model).__name__} has no conditional scale")


def conditional_survival(model: Model, y, x):
    """P(Y > y | X = x); vectorized over either argument."""
    _require_bivariate(model, "conditional_survival")
    if isinstance(model, IndependentProduct):
        surv = 1.0 - model.y_law.cdf(y)
        return np.broadcast_to(surv, np.broadcast_shapes(np.shape(surv), np.shape(x)))
    loc = conditional_location(model, x)
    return ndtr((loc - np.asarray(y, dtype=float)) / conditional_scale(model))


def marginal_cdf_x(model: Model, t):
    """CDF of the x marginal (or of the single variable, for univariate models)."""
    if isinstance(model, (BivariateGaussian,)):
        return ndtr(np.asarray(t, dtype=float))
    if isinstance(model, (AdditiveNoise, IndependentProduct)):
        return model.x_law.cdf(t)
    if isinstance(model, UnivariateNormal):
        return ndtr((np.asarray(t, dtype=float) - model.mu) / model.sigma)
    if isinstance(model, UniformMax):
        return np.clip(np.asarray(t, dtype=float) / model.theta, 0.0, 1.0)
    raise DomainError(f"not a model: {model!r}")


# ---------------------------------------------------------------------------
# Expectation rules over the x marginal
# ---------------------------------------------------------------------------

def law_expectation_rule(law: Law, breakpoints=(), order: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights for E[h(X)] under ``law``.

    Panels are split at the given breakpoints and capped in width, and the
    law's density is folded into the weights (which therefore sum to ~1).
    """
    lo, hi = law.support()
    cuts = {lo, hi}
    for b in breakpoints:
        b = float(b)
        if lo < b < hi:
            cuts.add(b)
    edges = sorted(cuts)
    cap = law.max_panel()
    t0, w0 = _leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        width = b - a
        if width <= 0.0:
            continue
        pieces = max(1, math.ceil(width / cap))
        sub = np.linspace(a, b, pieces + 1)
        for p, q in zip(sub[:-1], sub[1:]):
            half = 0.5 * (q - p)
            x = half * (t0 + 1.0) + p
            nodes.append(x)
            weights.append(half * w0 * law.pdf(x))
    return np.concatenate(nodes), np.concatenate(weights)


def plain_law_rule(law: Law, order: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Single-rule expectation nodes/weights: Hermite for normal, Legendre for uniform."""
    if isinstance(law, NormalLaw):
        rule = hermite_rule(order)
        return rule.nodes, rule.weights
    t0, w0 = _leggauss(order)
    half = 0.5 * (law.b - law.a)
    return half * (t0 + 1.0) + law.a, (0.5 * w0)  # pdf * half = 1/2 exactly


def _x_law(model: Model) -> Law:
    if isinstance(model, BivariateGaussian):
        return NormalLaw()
    if isinstance(model, (AdditiveNoise, IndependentProduct)):
        return model.x_law
    raise UnsupportedError(f"{type(model).__name__} has no x marginal law")


def _location_preimage(model: Model, lo: float, hi: float) -> list[tuple[float, float]]:
    """x intervals where the conditional location falls in [lo, hi]."""
    xlo, xhi = _x_law(model).support()
    if isinstance(model, BivariateGaussian):
        return Link("linear", model.rho).preimage(lo, hi, xlo, xhi)
    if isinstance(model, AdditiveNoise):
        return model.link.preimage(lo, hi, xlo, xhi)
    return []


def x_expectation_rule(model: Model, levels=(), cuts=(), order: int = 64,
                       half_width: float = FEATURE_HALF_WIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Expectation rule over the x marginal, resolving conditional-CDF kernels.

    ``levels`` are y values at which integrands contain a term like
    P(Y > level | X); panels are split where the conditional location passes
    within ``half_width`` noise scales of each level, which is where such a
    kernel actually varies. The split is graded (nested sub-intervals of the
    transition region) so a kernel living on a tiny noise scale is resolved
    even at low base orders. ``cuts`` force additional plain panel
    boundaries (e.g. an indicator threshold in x itself).
    """
    _require_bivariate(model, "x_expectation_rule")
    breakpoints = list(cuts)
    if levels and not isinstance(model, IndependentProduct):
        scale = conditional_scale(model)
        for level in levels:
            for fraction in (1.0, 0.45, 0.15):
                w = fraction * half_width * scale
                for a, b in _location_preimage(model, float(level) - w, float(level) + w):
                    breakpoints += [a, b]
    return law_expectation_rule(_x_law(model), breakpoints, order)


def marginal_cdf_y(model: Model, t: float, order: int = 64) -> float:
    """CDF of the y marginal at scalar ``t``.

    For additive-noise models this is E_X[Phi((t - g(X)) / sigma)], by
    Hermite quadrature for normal X and Legendre quadrature for uniform X;
    when the noise scale is below 0.25 the x rule is refined around the
    kernel's transition region so that tiny-noise models stay accurate.
    """
    _require_bivariate(model, "marginal_cdf_y")
    t = float(t)
    if isinstance(model, BivariateGaussian):
        return float(ndtr(t))
    if isinstance(model, IndependentProduct):
        return float(model.y_law.cdf(t))
    if model.noise_sigma >= 0.25:
        nodes, weights = plain_law_rule(model.x_law, order)
    else:
        nodes, weights = x_expectation_rule(model, levels=[t], order=order)
    vals = ndtr((t - model.link(nodes)) / model.noise_sigma)
    return float(min(max(weights @ vals, 0.0), 1.0))


def y_moments(model: Model, order: int = 64) -> tuple[float, float]:
    """(mean, standard deviation) of the y marginal."""
    _require_bivariate(model, "y_moments")
    if isinstance(model, BivariateGaussian):
        return (0.0, 1.0)
    if isinstance(model, IndependentProduct):
        return model.y_law.moments()
    nodes, weights = plain_law_rule(model.x_law, order)
    g = model.link(nodes)
    m1 = float(weights @ g)
    m2 = float(weights @ (g * g))
    var = max(m2 - m1 * m1, 0.0) + model.noise_sigma ** 2
    return (m1, math.sqrt(var))


# ---------------------------------------------------------------------------
# Expectations over an independent copy of Y
# ---------------------------------------------------------------------------

def expect_y_prime(model: Model, h: Callable[[np.ndarray], np.ndarray], *,
                   upper: Optional[float] = None, sharp_levels=(),
                   order: int = 64) -> float:
    """E[h(Y')] where Y' follows the marginal law of Y.

    ``h`` must accept numpy arrays. With ``upper=c`` the integrand is
    restricted to ``Y' < c`` (computed with c as an exact integration
    boundary, so indicator truncations cost no accuracy). ``sharp_levels``
    lists y values around which h varies on the conditional noise scale;
    they refine the quadrature the same way ``x_expectation_rule`` does.

    Gaussian models integrate with a single Hermite rule; additive-noise
    models use a double rule over (X', Z'); independent products integrate
    directly over the y marginal.
    """
    _require_bivariate(model, "expect_y_prime")

    if isinstance(model, BivariateGaussian):
        law: Law = NormalLaw()
        return _law_expect(law, h, upper, sharp_levels, order)
    if isinstance(model, IndependentProduct):
        return _law_expect(model.y_law, h, upper, sharp_levels, order)

    # Additive noise: outer over X', inner over Z'.
    sigma = model.noise_sigma
    levels = list(sharp_levels) + ([upper] if upper is not None else [])
    outer_nodes, outer_weights = x_expectation_rule(
        model, levels=levels, order=order,
        half_width=FEATURE_HALF_WIDTH + NORMAL_TAIL + 1.0)
    g = model.link(outer_nodes)

    if upper is None:
        zr = hermite_rule(order)
        values = h(g[:, None] + sigma * zr.nodes[None, :])
        return float(outer_weights @ (values @ zr.weights))

    # Truncated inner integral over Z' in [-tail, zeta_i], as a fixed number
    # of equal panels per node so that low base orders stay accurate over
    # the up-to-17-unit range.
    zeta = np.minimum((upper - g) / sigma, NORMAL_TAIL)
    active = zeta > -NORMAL_TAIL
    if not np.any(active):
        return 0.0
    t0, w0 = _leggauss(order)
    panels = 6
    width = (zeta[active] + NORMAL_TAIL) / panels  # (nu,)
    offsets = np.arange(panels)[:, None] + 0.5 * (t0[None, :] + 1.0)  # (panels, order)
    z = -NORMAL_TAIL + width[:, None, None] * offsets[None, :, :]  # (nu, panels, order)
    values = h(g[active, None, None] + sigma * z) * normal_pdf(z)
    inner = (values @ (0.5 * w0)).sum(axis=1) * width
    return float(outer_weights[active] @ inner)


def _law_expect(law: Law, h, upper, sharp_levels, order: int) -> float:
    if upper is None and not sharp_levels:
        nodes, weights = plain_law_rule(law, order)
        return float(weights @ h(nodes))
    lo, hi = law.support()
    if upper is not None:
        if upper <= lo:
            return 0.0
        hi = min(hi, float(upper))
        if hi <= lo:
            return 0.0
    bounded = UniformLaw(lo, hi)
    nodes, weights = law_expectation_rule(bounded, sharp_levels, order)
    # law_expectation_rule folded the uniform density; swap in the real one.
    weights = weights * (hi - lo) * law.pdf(nodes)
    return float(weights @ h(nodes))
