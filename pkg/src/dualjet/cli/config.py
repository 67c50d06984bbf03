"""Run configuration: the line-oriented config format, validation and canonical dump.

A config file has five sections::

    [manifold]
    m = 1
    n = 2
    t = t1
    x = theta, phi

    [temporal_metric]
    h[1][1] = 1

    [spatial_metric]
    phi[1][1] = 1
    phi[2][2] = sin(theta)^2

    [connection]
    type = berwald            # berwald | explicit | random-cartan

    [verify]
    checks = all
    mode = symbolic

Matrix entries are 1-based.  Off-diagonal metric entries default to 0 and
are mirrored; diagonal entries are required.  ``#`` starts a comment.
"""

import hashlib
import re
from dataclasses import dataclass, field, replace

from ..chart import JetChart
from ..symbolic import ExprSyntaxError, UnknownIdentifierError, parse_expr

__all__ = [
    "ConfigError",
    "RunConfig",
    "CHECKS",
    "CONNECTION_TYPES",
    "load_config",
    "parse_config",
    "dump_config",
    "config_digest",
]

# dependency order: structural checks before the identity suites
CHECKS = ("normalization", "oracle-equivalence", "torsion", "curvature", "ricci", "deflection", "bianchi")
CONNECTION_TYPES = ("berwald", "explicit", "random-cartan")
_MODES = ("symbolic", "numeric", "both")
_SECTIONS = ("manifold", "temporal_metric", "spatial_metric", "connection", "verify")

# explicit block name -> index arity (and which ranges: t or x per slot)
_BLOCKS = {
    "A": "xxt",
    "H": "xxx",
    "C": "xxxt",
    "N1": "txt",
    "N2": "txx",
}
_FAULT_BLOCKS = ("A", "H", "C")


class ConfigError(ValueError):
    """Bad config text.  ``line`` and ``column`` are 1-based; ``field`` names the entry."""

    def __init__(self, message, line=None, column=None, field=None, path=None):
        self.message = message
        self.line = line
        self.column = column
        self.field = field
        self.path = path
        where = ""
        if line is not None:
            where = f"{path or '<config>'}:{line}:{column or 1}: "
        elif path:
            where = f"{path}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class RunConfig:
    """A validated run description.  Expression fields hold canonical text."""

    m: int
    n: int
    t_names: tuple
    x_names: tuple
    momentum_prefix: str = "p"
    h: tuple = ()  # ((a, b, text), ...) upper triangle, 1-based
    phi: tuple = ()
    connection: str = "berwald"
    blocks: tuple = ()  # ((name, idx, text), ...) for explicit connections
    seed_connection: int = 0
    degree: int = 2
    density: float = 0.5
    canonical_n: bool = False
    fault: tuple = None  # (block, idx)
    fault_delta: str = "1"
    checks: tuple = CHECKS
    mode: str = "symbolic"
    tol: float = 1e-9
    samples: int = 100
    seed: int = 0
    fields: int = 3
    ricci_reading: str = "corrected"
    identity12: str = "full"
    report: str = None
    summary: str = None
    latex: str = None

    def chart(self):
        return JetChart(self.m, self.n, self.t_names, self.x_names, self.momentum_prefix)

    def with_overrides(self, **kw):
        """Copy with non-None keyword values replaced and re-validated."""
        kw = {k: v for k, v in kw.items() if v is not None}
        if "checks" in kw:
            kw["checks"] = _normalize_checks(list(kw["checks"]), None, None)
        cfg = replace(self, **kw)
        _validate_verify(cfg)
        return cfg


@dataclass
class _Entry:
    section: str
    key: str
    idx: tuple
    value: str
    line: int
    key_col: int
    value_col: int


_KEY = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)((?:\[\s*\d+\s*\])*)\Z")
_SUB = re.compile(r"\[\s*(\d+)\s*\]")


def _tokenize(text, path):
    entries = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        lead = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, lead + 1, path=path)
            name = stripped[1:-1].strip()
            if name not in _SECTIONS:
                raise ConfigError(f"unknown section [{name}]", lineno, lead + 2, path=path)
            section = name
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno, lead + 1, path=path)
        if section is None:
            raise ConfigError("entry before the first section header", lineno, lead + 1, path=path)
        eq = line.index("=")
        key = line[:eq].strip()
        m = _KEY.match(key)
        if not m:
            raise ConfigError(f"malformed key {key!r}", lineno, lead + 1, path=path)
        vstart = eq + 1
        while vstart < len(line) and line[vstart] in " \t":
            vstart += 1
        value = line[vstart:].rstrip()
        if not value:
            raise ConfigError(f"missing value for {key}", lineno, eq + 2, field=key, path=path)
        idx = tuple(int(s) for s in _SUB.findall(m.group(2)))
        entries.append(_Entry(section, m.group(1), idx, value, lineno, lead + 1, vstart + 1))
    return entries


def _field_name(e):
    return e.key + "".join(f"[{k}]" for k in e.idx)


def _err(e, msg, col=None):
    return ConfigError(msg, e.line, col or e.value_col, field=_field_name(e))


def _parse_expr_entry(e, chart, allowed=None):
    """Parse an expression value; errors point at the offending column."""
    names = chart.coordinate_names if allowed is None else allowed
    try:
        expr = parse_expr(e.value, names)
    except UnknownIdentifierError as exc:
        col = e.value_col + len(e.value.encode("utf-8")[: exc.offset].decode("utf-8", "ignore"))
        if exc.name in chart.coordinate_names:
            msg = f"{_field_name(e)}: coordinate {exc.name!r} is not allowed here"
        else:
            msg = f"{_field_name(e)}: undeclared coordinate {exc.name!r}"
        raise ConfigError(msg, e.line, col, field=_field_name(e)) from None
    except ExprSyntaxError as exc:
        col = e.value_col + len(e.value.encode("utf-8")[: exc.offset].decode("utf-8", "ignore"))
        msg = re.sub(r" at byte offset \d+$", "", exc.args[0])
        raise ConfigError(f"{_field_name(e)}: {msg}", e.line, col, field=_field_name(e)) from None
    return str(expr)


def _as_int(e, lo=None):
    try:
        v = int(e.value)
    except ValueError:
        raise _err(e, f"{e.key} must be an integer") from None
    if lo is not None and v < lo:
        raise _err(e, f"{e.key} must be at least {lo}")
    return v


def _as_float(e):
    try:
        return float(e.value)
    except ValueError:
        raise _err(e, f"{e.key} must be a number") from None


def _as_bool(e):
    v = e.value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise _err(e, f"{e.key} must be true or false")


def _names(e):
    return tuple(s.strip() for s in e.value.split(","))


def _normalize_checks(items, e, path):
    out = []
    for c in items:
        c = c.strip()
        if c == "all":
            out.extend(CHECKS)
        elif c in CHECKS:
            out.append(c)
        else:
            msg = f"unknown check {c!r}; expected one of {', '.join(CHECKS)} or all"
            if e is None:
                raise ConfigError(msg, field="checks", path=path)
            raise _err(e, msg)
    if not out:
        raise ConfigError("at least one check must be selected", field="checks", path=path)
    return tuple(k for k in CHECKS if k in out)


def _validate_verify(cfg):
    if cfg.mode not in _MODES:
        raise ConfigError(f"mode must be one of {', '.join(_MODES)}", field="mode")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive", field="tol")
    if cfg.samples < 1:
        raise ConfigError("samples must be at least 1", field="samples")
    if not cfg.checks:
        raise ConfigError("at least one check must be selected", field="checks")


def parse_config(text, path=None):
    """Parse and validate config text into a :class:`RunConfig`."""
    entries = _tokenize(text, path)
    seen = {}
    for e in entries:
        k = (e.section, e.key, e.idx)
        if k in seen:
            raise ConfigError(f"duplicate entry {_field_name(e)} (first on line {seen[k]})", e.line, e.key_col,
                              field=_field_name(e), path=path)
        seen[k] = e.line
    try:
        cfg = _build(entries, path)
        from .runner import build_geometry

        build_geometry(cfg)
        return cfg
    except ConfigError as exc:
        if exc.path is None and path is not None:
            raise ConfigError(exc.message, exc.line, exc.column, exc.field, path) from None
        raise


def _build(entries, path):
    by = {s: [e for e in entries if e.section == s] for s in _SECTIONS}
    kw = {}

    # manifold
    man = {e.key: e for e in by["manifold"]}
    for e in by["manifold"]:
        if e.key not in ("m", "n", "t", "x", "momentum") or e.idx:
            raise ConfigError(f"unknown key {_field_name(e)} in [manifold]", e.line, e.key_col, field=e.key)
    for k in ("m", "n"):
        if k not in man:
            raise ConfigError(f"[manifold] needs {k}", field=k)
    m, n = _as_int(man["m"], 1), _as_int(man["n"], 1)
    t_names = _names(man["t"]) if "t" in man else tuple(f"t{a}" for a in range(1, m + 1))
    x_names = _names(man["x"]) if "x" in man else tuple(f"x{i}" for i in range(1, n + 1))
    prefix = man["momentum"].value.strip() if "momentum" in man else "p"
    if len(t_names) != m:
        raise _err(man["t"], f"t lists {len(t_names)} names but m = {m}")
    if len(x_names) != n:
        raise _err(man["x"], f"x lists {len(x_names)} names but n = {n}")
    try:
        chart = JetChart(m, n, t_names, x_names, prefix)
    except ValueError as exc:
        anchor = man.get("t") or man.get("x") or man["m"]
        raise _err(anchor, str(exc)) from None
    kw.update(m=m, n=n, t_names=t_names, x_names=x_names, momentum_prefix=prefix)

    # metrics
    for sec, key, size, allowed in (
        ("temporal_metric", "h", m, chart.t_names),
        ("spatial_metric", "phi", n, chart.x_names),
    ):
        vals = {}
        for e in by[sec]:
            if e.key != key or len(e.idx) != 2:
                raise ConfigError(f"[{sec}] expects entries {key}[r][c]", e.line, e.key_col, field=_field_name(e))
            a, b = e.idx
            if not (1 <= a <= size and 1 <= b <= size):
                raise ConfigError(f"{_field_name(e)} is outside the {size}x{size} matrix", e.line, e.key_col,
                                  field=_field_name(e))
            expr = _parse_expr_entry(e, chart, allowed)
            lo, hi = min(a, b), max(a, b)
            if (lo, hi) in vals and vals[lo, hi][0] != expr:
                raise _err(e, f"{_field_name(e)} disagrees with its symmetric partner")
            vals[lo, hi] = (expr, e)
        for a in range(1, size + 1):
            if (a, a) not in vals:
                raise ConfigError(f"missing {key}[{a}][{a}]: {size} diagonal entries are required", field=f"{key}[{a}][{a}]")
        kw[key] = tuple((a, b, vals[a, b][0]) for a, b in sorted(vals) if vals[a, b][0] != "0" or a == b)

    # connection
    con = by["connection"]
    scalar = {e.key: e for e in con if not e.idx and e.key != "fault"}
    kind = scalar["type"].value.strip() if "type" in scalar else "berwald"
    if kind not in CONNECTION_TYPES:
        raise _err(scalar["type"], f"connection type must be one of {', '.join(CONNECTION_TYPES)}")
    kw["connection"] = kind
    blocks = []
    for e in con:
        if e.key == "fault":
            if e.idx:
                raise ConfigError("write fault = H[1][2][2]", e.line, e.key_col, field="fault")
            kw["fault"] = _parse_fault(e, m, n)
            continue
        if e.key in _BLOCKS:
            if kind != "explicit":
                raise ConfigError(f"block entries need type = explicit", e.line, e.key_col, field=_field_name(e))
            shape = _BLOCKS[e.key]
            if len(e.idx) != len(shape) or any(
                not 1 <= k <= (m if s == "t" else n) for k, s in zip(e.idx, shape)
            ):
                raise ConfigError(f"{_field_name(e)}: index out of range for m = {m}, n = {n}", e.line, e.key_col,
                                  field=_field_name(e))
            blocks.append((e.key, e.idx, _parse_expr_entry(e, chart)))
            continue
        allowed = {"type", "fault_delta"}
        if kind == "random-cartan":
            allowed |= {"seed", "degree", "density", "canonical_n"}
        if e.key not in allowed or e.idx:
            raise ConfigError(f"unknown key {_field_name(e)} in [connection] for type = {kind}", e.line, e.key_col,
                              field=_field_name(e))
    if "fault_delta" in scalar:
        kw["fault_delta"] = _parse_expr_entry(scalar["fault_delta"], chart)
    if kind == "random-cartan":
        if "seed" in scalar:
            kw["seed_connection"] = _as_int(scalar["seed"], 0)
        if "degree" in scalar:
            kw["degree"] = _as_int(scalar["degree"], 0)
        if "density" in scalar:
            d = _as_float(scalar["density"])
            if not 0 <= d <= 1:
                raise _err(scalar["density"], "density must lie in [0, 1]")
            kw["density"] = d
        if "canonical_n" in scalar:
            kw["canonical_n"] = _as_bool(scalar["canonical_n"])
    kw["blocks"] = tuple(sorted(b for b in blocks if b[2] != "0"))

    # verify
    ver = {}
    for e in by["verify"]:
        if e.idx or e.key not in (
            "checks", "mode", "tol", "samples", "seed", "fields", "report", "summary", "latex",
            "ricci_reading", "identity12",
        ):
            raise ConfigError(f"unknown key {_field_name(e)} in [verify]", e.line, e.key_col, field=_field_name(e))
        ver[e.key] = e
    if "checks" in ver:
        kw["checks"] = _normalize_checks(ver["checks"].value.split(","), ver["checks"], path)
    if "mode" in ver:
        v = ver["mode"].value.strip()
        if v not in _MODES:
            raise _err(ver["mode"], f"mode must be one of {', '.join(_MODES)}")
        kw["mode"] = v
    if "tol" in ver:
        v = _as_float(ver["tol"])
        if not v > 0:
            raise _err(ver["tol"], "tol must be positive")
        kw["tol"] = v
    if "samples" in ver:
        kw["samples"] = _as_int(ver["samples"], 1)
    if "seed" in ver:
        kw["seed"] = _as_int(ver["seed"], 0)
    if "fields" in ver:
        kw["fields"] = _as_int(ver["fields"], 1)
    for k, choices in (("ricci_reading", ("corrected", "printed")), ("identity12", ("full", "short"))):
        if k in ver:
            v = ver[k].value.strip()
            if v not in choices:
                raise _err(ver[k], f"{k} must be one of {', '.join(choices)}")
            kw[k] = v
    for k in ("report", "summary", "latex"):
        if k in ver:
            kw[k] = ver[k].value.strip()
    return RunConfig(**kw)


def _parse_fault(e, m, n):
    m_ = re.fullmatch(r"\s*(A|H|C)((?:\[\s*\d+\s*\])+)\s*", e.value)
    if not m_:
        raise _err(e, "fault must look like A[i][j][c], H[i][j][k] or C[i][j][k][c]")
    name = m_.group(1)
    idx = tuple(int(s) for s in _SUB.findall(m_.group(2)))
    shape = _BLOCKS[name]
    if len(idx) != len(shape) or any(not 1 <= k <= (m if s == "t" else n) for k, s in zip(idx, shape)):
        raise _err(e, f"fault index {list(idx)} out of range for {name} with m = {m}, n = {n}")
    return (name, idx)


def load_config(path):
    """Read and validate a config file (UTF-8)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from None
    except UnicodeDecodeError:
        raise ConfigError("config is not valid UTF-8", path=str(path)) from None
    return parse_config(text, str(path))


def _idx(idx):
    return "".join(f"[{k}]" for k in idx)


def dump_config(cfg, include_outputs=True):
    """Canonical config text; ``parse_config(dump_config(c)) == c``."""
    out = ["[manifold]", f"m = {cfg.m}", f"n = {cfg.n}", f"t = {', '.join(cfg.t_names)}",
           f"x = {', '.join(cfg.x_names)}", f"momentum = {cfg.momentum_prefix}", "", "[temporal_metric]"]
    out += [f"h[{a}][{b}] = {v}" for a, b, v in cfg.h]
    out += ["", "[spatial_metric]"]
    out += [f"phi[{a}][{b}] = {v}" for a, b, v in cfg.phi]
    out += ["", "[connection]", f"type = {cfg.connection}"]
    if cfg.connection == "random-cartan":
        out += [f"seed = {cfg.seed_connection}", f"degree = {cfg.degree}", f"density = {cfg.density!r}",
                f"canonical_n = {'true' if cfg.canonical_n else 'false'}"]
    out += [f"{name}{_idx(idx)} = {v}" for name, idx, v in cfg.blocks]
    if cfg.fault is not None:
        out += [f"fault = {cfg.fault[0]}{_idx(cfg.fault[1])}", f"fault_delta = {cfg.fault_delta}"]
    out += ["", "[verify]", f"checks = {', '.join(cfg.checks)}", f"mode = {cfg.mode}", f"tol = {cfg.tol!r}",
            f"samples = {cfg.samples}", f"seed = {cfg.seed}", f"fields = {cfg.fields}",
            f"ricci_reading = {cfg.ricci_reading}", f"identity12 = {cfg.identity12}"]
    if include_outputs:
        for k in ("report", "summary", "latex"):
            v = getattr(cfg, k)
            if v:
                out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"


def config_digest(cfg):
    """sha256 of the canonical config without output paths."""
    return hashlib.sha256(dump_config(cfg, include_outputs=False).encode("utf-8")).hexdigest()
