"""INI experiment configuration.

Sections and keys (all optional unless a command needs them)::

    [problem]        k, kernel (hankel1 | y0-mixed), eta
    [shape]          kind, then catalog parameters (a1, a2, a3, a4, a5, a6,
                     a7, amplitude, frequency) or for custom-laurent
                     terms = n:c, n:c, ...  and  rational = d@a, d@a, ...
    [data]           data (constant | fundamental | pole), value,
                     source_re, source_im, order
    [placement]      strategy (disc-circle | annular | adaptive), R, spacing,
                     beta, gamma, dmax, dmax_rule (min | max)
    [discretization] N, N_list, R_list, M (integer or auto)
    [model]          rho, rho_list, R_list, m_max, N_list, eps
    [outputs]        dir, prefix, field, field_spacing

Lists accept ``a, b, c`` or an inclusive range ``start:stop:step``.
Complex numbers use Python syntax (``-0.8-0.2j``).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass

import numpy as np

from .bdata import BoundaryData
from .geometry.shapes import CATALOG, make_shape
from .geometry.shapes import Shape, custom_laurent
from .solver import Kernel, Placement, SolveConfig

BEGIN = "mfshelm-config-begin"
END = "mfshelm-config-end"

KNOWN = {
    "problem": {"k", "kernel", "eta"},
    "shape": {"kind", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "amplitude", "frequency",
              "terms", "rational"},
    "data": {"data", "value", "source_re", "source_im", "order"},
    "placement": {"strategy", "r", "spacing", "beta", "gamma", "dmax", "dmax_rule"},
    "discretization": {"n", "n_list", "r_list", "m"},
    "model": {"rho", "rho_list", "r_list", "m_max", "n_list", "eps"},
    "outputs": {"dir", "prefix", "field", "field_spacing"},
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the section, key and line."""


@dataclass
class Experiment:
    """A parsed configuration plus its source text."""

    parser: configparser.ConfigParser
    text: str
    source: str = "<string>"

    # -- helpers ---------------------------------------------------------
    def _line(self, section: str, key: str | None = None) -> int | None:
        cur = None
        for i, raw in enumerate(self.text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("[") and line.endswith("]"):
                cur = line[1:-1].strip().lower()
                if key is None and cur == section:
                    return i
                continue
            if cur == section and key is not None and "=" in line:
                if line.split("=", 1)[0].strip().lower() == key:
                    return i
        return None

    def error(self, section: str, key: str | None, msg: str) -> ConfigError:
        line = self._line(section, key)
        where = f"[{section}]" + (f" {key}" if key else "")
        at = f" (line {line})" if line else ""
        return ConfigError(f"{self.source}{at}: {where}: {msg}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def get(self, section: str, key: str, default=None) -> str | None:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        return default

    def getfloat(self, section: str, key: str, default=None) -> float | None:
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {raw!r}") from None

    def getcomplex(self, section: str, key: str, default=None) -> complex | None:
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return complex(raw.replace(" ", ""))
        except ValueError:
            raise self.error(section, key, f"expected a complex number, got {raw!r}") from None

    def getint(self, section: str, key: str, default=None) -> int | None:
        raw = self.get(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {raw!r}") from None

    def getlist(self, section: str, key: str, cast=float) -> list | None:
        raw = self.get(section, key)
        if raw is None:
            return None
        try:
            return parse_list(raw, cast)
        except ValueError as exc:
            raise self.error(section, key, str(exc)) from None

    # -- builders ----------------------------------------------------------
    def k(self, required: bool = True) -> float | None:
        k = self.getfloat("problem", "k")
        if k is None:
            if required:
                raise self.error("problem", "k", "missing wavenumber")
            return None
        if not k > 0:
            raise self.error("problem", "k", "wavenumber must be positive")
        return k

    def kernel(self) -> Kernel:
        kind = self.get("problem", "kernel", "hankel1")
        try:
            return Kernel(kind, self.getfloat("problem", "eta", 1.0))
        except ValueError as exc:
            raise self.error("problem", "kernel", str(exc)) from None

    def shape(self) -> Shape:
        kind = self.get("shape", "kind", "disc")
        if kind not in CATALOG:
            raise self.error("shape", "kind", f"unknown shape kind {kind!r}; expected one of {sorted(CATALOG)}")
        if kind == "custom-laurent":
            try:
                terms = [_pair(p, ":", int) for p in _split(self.get("shape", "terms", ""))]
                rational = [_pair(p, "@", complex) for p in _split(self.get("shape", "rational", ""))]
                return custom_laurent(terms, rational)
            except ValueError as exc:
                raise self.error("shape", "terms", str(exc)) from None
        params = {}
        for key in ("a1", "a2", "a3", "a4"):
            if self.has("shape", key):
                params[key] = self.getfloat("shape", key)
        for key in ("a5", "a6", "a7"):
            if self.has("shape", key):
                params[key] = self.getcomplex("shape", key)
        if self.has("shape", "amplitude"):
            params["amplitude"] = self.getfloat("shape", "amplitude")
        if self.has("shape", "frequency"):
            params["frequency"] = self.getint("shape", "frequency")
        try:
            return make_shape(kind, **params)
        except TypeError:
            raise self.error("shape", None, f"parameters {sorted(params)} do not apply to {kind}") from None

    def data(self) -> BoundaryData:
        kind = self.get("data", "data", "constant")
        if kind == "constant":
            return BoundaryData("constant", value=self.getcomplex("data", "value", 1.0))
        if kind in ("fundamental", "pole"):
            if not self.has("data", "source_re"):
                raise self.error("data", "source_re", f"{kind} data needs a source location")
            src = complex(self.getfloat("data", "source_re"), self.getfloat("data", "source_im", 0.0))
            return BoundaryData(kind, source=src, order=self.getint("data", "order", 1))
        raise self.error("data", "data", f"unknown data kind {kind!r}; expected constant, fundamental or pole")

    def placement(self) -> Placement:
        strategy = self.get("placement", "strategy", "annular")
        if strategy not in ("disc-circle", "annular", "adaptive"):
            raise self.error("placement", "strategy", f"unknown strategy {strategy!r}")
        spacing = self.get("placement", "spacing", "conformal-angle")
        if spacing not in ("conformal-angle", "arclength"):
            raise self.error("placement", "spacing", f"unknown spacing {spacing!r}")
        rule = self.get("placement", "dmax_rule", "min")
        if rule not in ("min", "max"):
            raise self.error("placement", "dmax_rule", f"unknown rule {rule!r}")
        dmax = self.get("placement", "dmax")
        dmax = None if dmax in (None, "auto") else self.getfloat("placement", "dmax")
        R = self.getfloat("placement", "r", 1.5)
        return Placement(strategy, R, spacing, self.getfloat("placement", "beta", 0.7),
                         self.getfloat("placement", "gamma", 0.4), dmax, rule)

    def M(self) -> int | None:
        raw = self.get("discretization", "m", "auto")
        if raw == "auto":
            return None
        M = self.getint("discretization", "m")
        if M < 4:
            raise self.error("discretization", "m", "need at least 4 boundary nodes")
        return M

    def solve_config(self) -> SolveConfig:
        return SolveConfig(self.shape(), self.k(), self.data(), self.placement(), self.M(),
                           self.kernel(), self.getint("discretization", "n"))

    def render(self) -> str:
        """Resolved configuration as INI text (sorted, canonical)."""
        buf = io.StringIO()
        for sec in sorted(self.parser.sections()):
            buf.write(f"[{sec}]\n")
            for key in sorted(self.parser.options(sec)):
                buf.write(f"{key} = {self.parser.get(sec, key)}\n")
        return buf.getvalue()

    def header_lines(self) -> list[str]:
        return [BEGIN, *self.render().splitlines(), END]


def _split(raw: str) -> list[str]:
    return [p.strip() for p in raw.split(",") if p.strip()]


def _pair(p: str, sep: str, cast_first):
    if sep not in p:
        raise ValueError(f"expected 'x{sep}y', got {p!r}")
    a, b = p.split(sep, 1)
    return cast_first(a.strip().replace(" ", "")), complex(b.strip().replace(" ", ""))


def parse_list(raw: str, cast=float) -> list:
    raw = raw.strip()
    if not raw:
        return []
    if ":" in raw and "," not in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {raw!r}")
        a, b, s = (float(p) for p in parts)
        if s <= 0:
            raise ValueError("range step must be positive")
        n = int(math.floor((b - a) / s + 1e-9)) + 1
        vals = a + s * np.arange(n)
        out = [cast(round(v, 12)) for v in vals]
        return out
    try:
        return [cast(p) for p in _split(raw)]
    except ValueError:
        raise ValueError(f"cannot parse list {raw!r}") from None


def _extract_embedded(text: str) -> str:
    lines = text.splitlines()
    try:
        i = next(n for n, l in enumerate(lines) if l.strip() == f"# {BEGIN}")
        j = next(n for n, l in enumerate(lines) if l.strip() == f"# {END}")
    except StopIteration:
        return text
    return "\n".join(l[2:] if l.startswith("# ") else l.lstrip("#") for l in lines[i + 1:j]) + "\n"


def loads(text: str, source: str = "<string>") -> Experiment:
    """Parse INI text (or a result file carrying an embedded configuration)."""
    text = _extract_embedded(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    exp = Experiment(parser, text, source)
    for sec in parser.sections():
        if sec not in KNOWN:
            raise exp.error(sec, None, f"unknown section; expected one of {sorted(KNOWN)}")
        for key in parser.options(sec):
            if key not in KNOWN[sec]:
                raise exp.error(sec, key, "unknown key")
    return exp


def load(path) -> Experiment:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), str(path))
