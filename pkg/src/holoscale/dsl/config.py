"""Typed records built from ``.cdl`` files: domains, map families, experiments.

A ``.cdl`` file has up to three sections::

    domain {
      r = abs(z)^2 + abs(w)^2 - 1;     # repeatable; domain = all r < 0
      rho = 1 - sqrt(1 - abs(z)^2 - u^2);  # local form Im w > rho near p
      p = (1, 0);                      # boundary point the orbit approaches
      radius = 0.5;                    # trust region of rho
    }
    family {
      f = (z + a)/(1 + conj(a)*z);
      g = sqrt(1 - abs(a)^2)*w/(1 + conj(a)*z);
      alpha(j) = 1 - 2^(-j);
      limit = 1;
    }
    experiment {
      q = (0, 0); jmin = 1; jmax = 12; grid = 9; radius = 0.5;
      tol.zero = 1e-3;
    }
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import ConfigError, NonHolomorphicMapComponent
from .ast import Expr, free_vars, is_holomorphic
from .evaluate import evaluate, evaluate_scalar
from .parser import Parser
from .printer import fmt, format_real

DEFAULT_TOLERANCES: dict[str, float] = {
    "eig_degenerate": 1e-9,
    "zero": 1e-3,
    "zero_trend": 0.1,
    "det_degenerate": 1e-14,
    "det_trend": 0.1,
    "norm_flat": 1.0,
    "norm_growth": 0.2,
    "eigvec_indep": 1e-6,
    "mz": 0.25,
    "collapse": 1e-12,
    "hausdorff": 0.05,
    "ratio_cauchy": 1e-2,
    "escape": 2.0,
}

MAP_NAMES = frozenset({"z", "w", "a", "j"})
RHO_NAMES = frozenset({"z", "u"})
DOMAIN_NAMES = frozenset({"z", "w", "u"})
SCHEDULE_NAMES = frozenset({"j"})

Pair = tuple[complex, complex]


@dataclass(frozen=True)
class DefiningFunction:
    """Local boundary presentation: the domain side is ``Im w > rho(z, zb, Re w)``."""

    expr: Expr
    validity_radius: float = 1.0
    normalized: bool = True

    def __call__(self, z, u):
        v = evaluate(self.expr, {"z": z, "u": u}, strict=False)
        return np.real(v)

    def raw(self, z, u):
        return evaluate(self.expr, {"z": z, "u": u}, strict=False)

    def validate(self, n: int = 256, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        r = self.validity_radius
        z = r * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
        u = r * (2 * rng.random(n) - 1)
        with np.errstate(all="ignore"):
            v = np.asarray(self.raw(z, u + 0j))
        finite = np.isfinite(v)
        if np.any(np.abs(v.imag[finite]) > 1e-12):
            raise ConfigError("rho is not real-valued on its trust region")
        if self.normalized:
            v0 = complex(np.asarray(self.raw(0j, 0j))[()])
            if abs(v0) > 1e-12:
                raise ConfigError(f"rho(0, 0, 0) = {v0} but the boundary must pass through the origin")


@dataclass(frozen=True)
class Domain:
    """Intersection of ``{r_i(z, w) < 0}``; falls back to ``Im w > rho`` if no r is given."""

    constraints: tuple[Expr, ...] = ()
    rho: DefiningFunction | None = None
    boundary_point: Pair | None = None

    def contains(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        if not self.constraints:
            if self.rho is None:
                raise ConfigError("domain needs at least one r constraint or a rho")
            with np.errstate(all="ignore"):
                return np.imag(w) > self.rho(z, np.real(w) + 0j)
        inside = np.ones(np.broadcast(z, w).shape, dtype=bool)
        with np.errstate(all="ignore"):
            for r in self.constraints:
                val = evaluate(r, {"z": z, "w": w}, strict=False)
                inside &= np.real(val) < 0
        return inside


@dataclass(frozen=True)
class MapFamily:
    """j-indexed holomorphic maps ``(f, g)`` with parameter ``a = alpha_j``."""

    f: Expr
    g: Expr
    schedule: Expr | tuple[complex, ...]
    param_limit: complex = 1.0
    #: first index of an explicit schedule list
    schedule_start: int = 1

    def __post_init__(self):
        for name, e in (("f", self.f), ("g", self.g)):
            if not is_holomorphic(e):
                raise NonHolomorphicMapComponent(name, fmt(e))

    def alpha(self, j: int) -> complex:
        if isinstance(self.schedule, tuple):
            k = j - self.schedule_start
            if not 0 <= k < len(self.schedule):
                raise ConfigError(f"explicit schedule has no entry for j={j}")
            return complex(self.schedule[k])
        return evaluate_scalar(self.schedule, {"j": complex(j)})

    def bindings(self, j: int) -> dict:
        return {"a": self.alpha(j), "j": complex(j)}

    def __call__(self, j: int, z, w):
        b = self.bindings(j)
        b["z"] = z
        b["w"] = w
        return evaluate(self.f, b), evaluate(self.g, b)

    def check_schedule(self, jmin: int, jmax: int) -> None:
        dist = [abs(self.alpha(j) - self.param_limit) for j in range(jmin, jmax + 1)]
        if any(b >= a for a, b in zip(dist, dist[1:])):
            raise ConfigError("|alpha_j - limit| must decrease strictly along the schedule")


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Domain
    family: MapFamily
    q: Pair
    jmin: int = 1
    jmax: int = 12
    grid: int = 5
    radius: float = 0.5
    #: half-width of the sampling box around q for limit tracking
    region: float = 1.0
    tolerances: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 7
    n_interior: int = 2000
    n_boundary: int = 500
    jitter: int = 10
    type_degree: int = 3
    type_step: float = 0.25
    type_modulus: float = 2.0
    output_dir: str | None = None
    #: explicit values as read from the file, kept for printing
    entries: Mapping[str, Mapping[str, object]] = field(default_factory=dict, compare=False)

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    @property
    def j_range(self) -> range:
        return range(self.jmin, self.jmax + 1)

    def validate(self) -> None:
        if self.jmax < self.jmin:
            raise ConfigError("jmax < jmin")
        self.family.check_schedule(self.jmin, self.jmax)
        if self.domain.rho is not None:
            self.domain.rho.validate()
        if not bool(self.domain.contains(self.q[0], self.q[1])):
            raise ConfigError(f"base point q={self.q} is not inside the domain")


# -- .cdl parsing ---------------------------------------------------------------

_SECTION_KEYS = {
    "domain": ("r", "rho", "p", "radius"),
    "family": ("f", "g", "alpha(j)", "alpha", "limit"),
    "experiment": (
        "q", "jmin", "jmax", "grid", "radius", "region", "seed", "n", "nb", "jitter",
        "type.degree", "type.step", "type.modulus",
    ),
}
_NAMES_FOR_KEY = {
    ("domain", "r"): DOMAIN_NAMES,
    ("domain", "rho"): RHO_NAMES,
    ("family", "f"): MAP_NAMES,
    ("family", "g"): MAP_NAMES,
    ("family", "alpha(j)"): SCHEDULE_NAMES,
}


def _section_has_key(section: str, key: str) -> bool:
    return key in _SECTION_KEYS[section] or (section == "experiment" and key.startswith("tol."))


class _CdlParser(Parser):
    def __init__(self, source: str):
        super().__init__(source, frozenset())

    def value(self, names: frozenset[str]):
        """An expression, or a parenthesised tuple of expressions."""
        self.names = names
        if self.at("("):
            save = self.pos
            self.advance()
            first = self.expr()
            if self.at(","):
                items = [first]
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
                self.expect(")")
                return tuple(items)
            self.pos = save
        return self.expr()

    def document(self) -> dict[str, dict[str, list]]:
        doc: dict[str, dict[str, list]] = {}
        while self.tok.kind != "eof":
            head = self.expect_name()
            if head.text not in _SECTION_KEYS:
                self.pos -= 1
                self.fail(set(_SECTION_KEYS), f"unknown section {head.text!r}")
            self.expect("{")
            body = doc.setdefault(head.text, {})
            while not self.at("}"):
                key_tok = self.expect_name()
                key = key_tok.text
                if self.at("("):
                    self.advance()
                    arg = self.expect_name().text
                    self.expect(")")
                    key = f"{key}({arg})"
                if not _section_has_key(head.text, key):
                    self.pos -= 1
                    self.fail(set(_SECTION_KEYS[head.text]), f"unknown key {key!r} in section {head.text!r}")
                self.expect("=")
                names = _NAMES_FOR_KEY.get((head.text, key), frozenset())
                val = self.value(names)
                self.expect(";")
                body.setdefault(key, []).append((val, key_tok))
            self.expect("}")
        return doc


def _const(e, what: str) -> complex:
    if isinstance(e, tuple):
        raise ConfigError(f"{what}: expected a single value")
    if free_vars(e):
        raise ConfigError(f"{what}: expected a constant, found variables {sorted(free_vars(e))}")
    return evaluate_scalar(e, {})


def _real(e, what: str) -> float:
    c = _const(e, what)
    if c.imag != 0:
        raise ConfigError(f"{what}: expected a real number")
    return c.real


def _int(e, what: str) -> int:
    x = _real(e, what)
    if x != int(x):
        raise ConfigError(f"{what}: expected an integer")
    return int(x)


def _pair(e, what: str) -> Pair:
    if not isinstance(e, tuple) or len(e) != 2:
        raise ConfigError(f"{what}: expected a pair (c1, c2)")
    return (_const(e[0], what), _const(e[1], what))


def _single(body: dict, key: str):
    vals = body.get(key)
    if not vals:
        return None
    if len(vals) > 1:
        tok = vals[1][1]
        raise ConfigError(f"{tok.line}:{tok.col}: duplicate key {key!r}")
    return vals[0][0]


def _expr_value(v, what: str) -> Expr:
    if isinstance(v, tuple):
        raise ConfigError(f"{what}: expected an expression, not a tuple")
    return v


def parse_config(source: str) -> ExperimentConfig:
    doc = _CdlParser(source).document()
    for sec in ("domain", "family"):
        if sec not in doc:
            raise ConfigError(f"missing section {sec!r}")
    d, fam = doc["domain"], doc["family"]
    exp = doc.get("experiment", {})

    constraints = tuple(_expr_value(v, "domain.r") for v, _ in d.get("r", []))
    rho = None
    radius = _single(d, "radius")
    if _single(d, "rho") is not None:
        rho = DefiningFunction(
            _expr_value(_single(d, "rho"), "domain.rho"),
            validity_radius=_real(radius, "domain.radius") if radius is not None else 1.0,
        )
    p = _single(d, "p")
    domain = Domain(constraints, rho, _pair(p, "domain.p") if p is not None else None)

    f, g = _single(fam, "f"), _single(fam, "g")
    if f is None or g is None:
        raise ConfigError("family needs both f and g")
    sched = _single(fam, "alpha(j)")
    if sched is not None:
        schedule = _expr_value(sched, "family.alpha(j)")
    elif _single(fam, "alpha") is not None:
        raw = _single(fam, "alpha")
        items = raw if isinstance(raw, tuple) else (raw,)
        schedule = tuple(_const(x, "family.alpha") for x in items)
    else:
        raise ConfigError("family needs alpha(j) = <expr> or alpha = (<c>, ...)")
    limit = _single(fam, "limit")
    family = MapFamily(
        _expr_value(f, "family.f"),
        _expr_value(g, "family.g"),
        schedule,
        _const(limit, "family.limit") if limit is not None else 1.0 + 0j,
    )

    kwargs: dict = {}
    q = _single(exp, "q")
    kwargs["q"] = _pair(q, "experiment.q") if q is not None else (0j, 0j)
    ints = {"jmin": "jmin", "jmax": "jmax", "grid": "grid", "seed": "seed", "n": "n_interior",
            "nb": "n_boundary", "jitter": "jitter", "type.degree": "type_degree"}
    for key, attr in ints.items():
        v = _single(exp, key)
        if v is not None:
            kwargs[attr] = _int(v, f"experiment.{key}")
    reals = {"radius": "radius", "region": "region", "type.step": "type_step", "type.modulus": "type_modulus"}
    for key, attr in reals.items():
        v = _single(exp, key)
        if v is not None:
            kwargs[attr] = _real(v, f"experiment.{key}")
    tols = dict(DEFAULT_TOLERANCES)
    for key in exp:
        if key.startswith("tol."):
            tols[key[4:]] = _real(_single(exp, key), f"experiment.{key}")
    kwargs["tolerances"] = tols
    entries = {sec: {k: [v for v, _ in vals] for k, vals in body.items()} for sec, body in doc.items()}
    cfg = ExperimentConfig(domain=domain, family=family, entries=entries, **kwargs)
    return cfg


# -- printing -------------------------------------------------------------------

def format_complex(c: complex) -> str:
    from .ast import Num

    return fmt(Num(complex(c)))


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return "(" + ", ".join(fmt(x) for x in v) + ")"
    return fmt(v)


def format_config(cfg: ExperimentConfig) -> str:
    """Canonical ``.cdl`` text for a parsed config (sections and keys in fixed order)."""
    lines: list[str] = []
    for sec in ("domain", "family", "experiment"):
        body = cfg.entries.get(sec)
        if not body:
            continue
        lines.append(f"{sec} {{")
        keys = list(_SECTION_KEYS[sec]) + sorted(k for k in body if k.startswith("tol."))
        for key in keys:
            for v in body.get(key, []):
                lines.append(f"  {key} = {_format_value(v)};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def parse(source: str):
    """Parse either a bare expression or a sectioned ``.cdl`` document."""
    from .parser import tokenize, parse_expr

    toks = tokenize(source)
    if len(toks) >= 2 and toks[0].kind == "name" and toks[1].kind == "op" and toks[1].text == "{":
        return parse_config(source)
    return parse_expr(source)


__all__ = [
    "DEFAULT_TOLERANCES", "DefiningFunction", "Domain", "MapFamily", "ExperimentConfig",
    "parse", "parse_config", "format_config", "format_complex", "format_real",
]
