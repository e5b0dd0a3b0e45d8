"""Run configuration: ``key = value`` lines grouped in sections.

Example::

    [frame]
    alpha = 1
    xi_max = 1e6

    [plan]
    mode = single
    energies = 0
    d = pi/6

Numbers may be written as small arithmetic expressions in ``pi``, ``e``
and ``sqrt``/``log`` (``pi/6``, ``2*pi/12``).  Lists are comma separated.
"""

from __future__ import annotations

import ast
import configparser
import io
import math
import operator
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ArgumentError

MODES = ("single", "critical", "schrodinger-critical", "glue",
         "infinite-prefix")
CHECKS = ("oscillatory", "envelope", "gram", "bessel", "count",
          "orthogonality")
H_PROFILES = ("log", "const", "power")

# centralized defaults, echoed into every manifest
DEFAULTS = {
    "alpha": 1.0,
    "xi_max": 1e6,
    "tol": 1e-9,
    "window": 0.01,
    "ratio_threshold": 0.7,
    "W": 4,
    "n_random": 20,
}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "log": math.log, "exp": math.exp}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or a small arithmetic expression."""
    try:
        return float(text)
    except ValueError:
        pass

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ArgumentError(f"cannot parse number {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ArgumentError(f"cannot parse number {text!r}") from exc
    return float(ev(tree))


def parse_list(text: str) -> list[float]:
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    return [parse_number(t) for t in items]


@dataclass
class RunConfig:
    """Validated parameters of one command."""

    command: str
    alpha: float = DEFAULTS["alpha"]
    xi_max: float = DEFAULTS["xi_max"]
    mode: str = "single"
    energies: list = field(default_factory=lambda: [0.0])
    angles: list | None = None
    d: float | None = None
    M: float | None = None
    a: float | None = None
    W: int = DEFAULTS["W"]
    h: str = "log"
    tol: float = DEFAULTS["tol"]
    window: float = DEFAULTS["window"]
    ratio_threshold: float = DEFAULTS["ratio_threshold"]
    checks: list = field(default_factory=lambda: list(CHECKS))
    n_random: int = DEFAULTS["n_random"]
    out: str | None = None
    seed: int = 0
    jobs: int = 1
    bundle: str | None = None
    format: str = "csv"
    sweep_d: list = field(default_factory=list)
    sweep_alpha: list = field(default_factory=list)
    sweep_margin: float | None = None

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ArgumentError(msg)

        need(self.command in ("construct", "verify", "sweep", "export"),
             f"unknown command {self.command!r}")
        need(0 < self.alpha < 2, "alpha must lie in (0, 2)")
        need(self.xi_max >= 1e3, "xi_max must be at least 1e3")
        need(0 < self.tol <= 1e-3, "tol must lie in (0, 1e-3]")
        need(0 < self.window < 0.1, "window must lie in (0, 0.1)")
        need(0 < self.ratio_threshold < 1, "ratio_threshold must lie in (0, 1)")
        need(self.jobs >= 1, "jobs must be positive")
        need(self.n_random >= 1, "n_random must be positive")
        unknown = set(self.checks) - set(CHECKS)
        need(not unknown, f"unknown checks {sorted(unknown)}")
        if self.command in ("verify", "export"):
            need(self.bundle is not None, "bundle path required")
            need(Path(self.bundle).is_dir(),
                 f"bundle {self.bundle!r} does not exist")
            need(self.format in ("csv", "json"), "format must be csv or json")
            return self
        need(self.mode in MODES, f"mode must be one of {MODES}")
        need(len(self.energies) >= 1, "at least one energy required")
        need(len(set(self.energies)) == len(self.energies),
             "energies must be distinct")
        if self.angles is not None:
            need(len(self.angles) == len(self.energies),
                 "one angle per energy")
        if self.command == "sweep":
            need(len(self.sweep_d) > 0 or self.sweep_margin is not None,
                 "sweep grid is empty")
            need(self.sweep_margin is None or self.sweep_margin > 0,
                 "sweep margin must be positive")
            need(all(v > 0 for v in self.sweep_d), "sweep d must be positive")
            need(all(0 < v < 2 for v in self.sweep_alpha),
                 "sweep alpha must lie in (0, 2)")
            return self
        if self.mode == "single":
            need(self.d is not None and self.d > 0, "single mode needs d > 0")
            need(len(self.energies) == 1, "single mode takes one energy")
        elif self.mode == "critical":
            need(len(self.energies) == 1, "critical mode takes one energy")
        elif self.mode == "schrodinger-critical":
            need(self.a is not None and self.a > 0,
                 "schrodinger-critical mode needs a > 0")
        elif self.mode == "glue":
            need(len(self.energies) >= 2, "glue mode needs at least two energies")
            need(self.W >= 1, "W must be positive")
        elif self.mode == "infinite-prefix":
            need(self.W >= 1, "W must be positive")
            need(self.h.split(":")[0] in H_PROFILES,
                 f"h must be one of {H_PROFILES} (with ':value')")
        return self

    @property
    def boundary_angles(self) -> list:
        return list(self.angles) if self.angles is not None else \
            [0.0] * len(self.energies)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_ini(self) -> str:
        """Normalized echo of the configuration."""
        cp = configparser.ConfigParser()
        cp["frame"] = {"alpha": repr(self.alpha), "xi_max": repr(self.xi_max)}
        plan = {"mode": self.mode,
                "energies": ", ".join(repr(e) for e in self.energies),
                "W": str(self.W), "h": self.h}
        if self.angles is not None:
            plan["angles"] = ", ".join(repr(a) for a in self.angles)
        for k in ("d", "M", "a"):
            if getattr(self, k) is not None:
                plan[k] = repr(getattr(self, k))
        cp["plan"] = plan
        cp["numerics"] = {"tol": repr(self.tol), "window": repr(self.window),
                          "ratio_threshold": repr(self.ratio_threshold)}
        cp["checks"] = {"enabled": ", ".join(self.checks),
                        "n_random": str(self.n_random)}
        if self.sweep_d or self.sweep_margin is not None:
            cp["sweep"] = {"d": ", ".join(repr(v) for v in self.sweep_d),
                           "alpha": ", ".join(repr(v) for v in self.sweep_alpha)}
            if self.sweep_margin is not None:
                cp["sweep"]["margin"] = repr(self.sweep_margin)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def load_config(command: str, path=None, *, out=None, seed=None, jobs=None,
                bundle=None, fmt=None) -> RunConfig:
    """Read and validate a configuration file (CLI flags take precedence)."""
    cp = configparser.ConfigParser()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ArgumentError(f"config file {path!r} not found")
        try:
            cp.read_string(p.read_text())
        except configparser.Error as exc:
            raise ArgumentError(f"malformed config: {exc}") from exc
    cfg = RunConfig(command)

    def get(section, key):
        return cp.get(section, key, fallback=None)

    try:
        if (v := get("frame", "alpha")) is not None:
            cfg.alpha = parse_number(v)
        if (v := get("frame", "xi_max")) is not None:
            cfg.xi_max = parse_number(v)
        if (v := get("plan", "mode")) is not None:
            cfg.mode = v.strip()
        if (v := get("plan", "energies")) is not None:
            cfg.energies = parse_list(v)
        if (v := get("plan", "angles")) is not None:
            cfg.angles = parse_list(v)
        for k in ("d", "M", "a"):
            if (v := get("plan", k)) is not None:
                setattr(cfg, k, parse_number(v))
        if (v := get("plan", "W")) is not None:
            cfg.W = int(parse_number(v))
        if (v := get("plan", "h")) is not None:
            cfg.h = v.strip()
        for k in ("tol", "window", "ratio_threshold"):
            if (v := get("numerics", k)) is not None:
                setattr(cfg, k, parse_number(v))
        if (v := get("checks", "enabled")) is not None:
            cfg.checks = [c.strip() for c in v.split(",") if c.strip()]
        if (v := get("checks", "n_random")) is not None:
            cfg.n_random = int(parse_number(v))
        if (v := get("sweep", "d")) is not None:
            cfg.sweep_d = parse_list(v)
        if (v := get("sweep", "margin")) is not None:
            cfg.sweep_margin = parse_number(v)
        if (v := get("sweep", "alpha")) is not None:
            cfg.sweep_alpha = parse_list(v)
        if (v := get("output", "dir")) is not None:
            cfg.out = v.strip()
        if (v := get("output", "bundle")) is not None:
            cfg.bundle = v.strip()
        if (v := get("output", "format")) is not None:
            cfg.format = v.strip()
    except ValueError as exc:
        raise ArgumentError(f"malformed config value: {exc}") from exc
    if out is not None:
        cfg.out = str(out)
    if seed is not None:
        cfg.seed = int(seed)
    if jobs is not None:
        cfg.jobs = int(jobs)
    if bundle is not None:
        cfg.bundle = str(bundle)
    if fmt is not None:
        cfg.format = fmt
    return cfg.validate()


def h_profile(spec: str):
    """Envelope profile ``h`` for infinite-prefix plans.

    ``log`` is ``ln(e + x)``, ``const:C`` a constant, ``power:p`` is
    ``(1 + x)**p``.
    """
    name, _, arg = spec.partition(":")
    if name == "log":
        return lambda x: math.log(math.e + x)
    if name == "const":
        c = parse_number(arg or "1")
        return lambda x: c
    if name == "power":
        p = parse_number(arg or "0.1")
        return lambda x: (1.0 + x) ** p
    raise ArgumentError(f"unknown h profile {spec!r}")
