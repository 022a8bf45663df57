"""Text format for declarative models: parser and serializer.

The format is line-oriented with bracketed sections; all numeric literals are
rational (`3/10`, never `0.3`).  Matrix rows list comma-separated entries.
Polynomial entries may use the complementary coordinates; operator entries use
the derivative tokens d1, d2, d3 with constant coefficients; products of
derivative tokens along different axes (mixed partials) are rejected because
the supported operator class admits pure powers of a single axis derivative
only.

Example::

    # phs-forge model
    version = 1
    name = timoshenko

    [coords]
    distributed = z1
    complementary = z2 z3

    [domain]
    interval = 0, 1

    [section]
    moments = I0: 1/100, I2: 1/120000

    [params]
    E = 200000000000
    nu = 3/10
    G = E / (2*(1 + nu))
    kappa = 5/6
    rho = 7850

    [lambda1]
    -z3, 0
    0, 0
    0, 1

    [lambda2]
    -z3, 0
    0, 1

    [F]
    d1, 0
    -1, d1

    [C]
    E, 0
    0, kappa*G
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .diffop import DiffOpMatrix, DomainSpec
from .exact import fr
from .models import CONSTITUTIVE_PRESETS, KinematicModel, ModelError
from .poly import Poly, PolyMatrix
from .sections import (
    CircleSection,
    IntervalSection,
    MomentSection,
    PointSection,
    RectangleSection,
)

FORMAT_VERSION = 1


class ParseError(ModelError):
    pass


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*|\+|-|/|\^|\(|\)))"
)


class OpEntry:
    """One operator-matrix entry: c0 + sum c_{k,i} d_k^i."""

    __slots__ = ("c0", "terms")

    def __init__(self, c0=Fraction(0), terms=None):
        self.c0 = fr(c0)
        self.terms = {k: fr(v) for k, v in (terms or {}).items() if v != 0}

    @staticmethod
    def token(axis: int) -> "OpEntry":
        return OpEntry(0, {(axis, 1): Fraction(1)})

    def __add__(self, other):
        if isinstance(other, Fraction):
            other = OpEntry(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
        return OpEntry(self.c0 + other.c0, terms)

    def __neg__(self):
        return OpEntry(-self.c0, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Fraction):
            return OpEntry(self.c0 * other, {k: v * other for k, v in self.terms.items()})
        if not self.terms:
            return other * self.c0
        if not other.terms:
            return self * other.c0
        axes = {k for (k, _) in self.terms} | {k for (k, _) in other.terms}
        if len(axes) > 1 or self.c0 != 0 or other.c0 != 0:
            raise ParseError(
                "mixed-derivative term: products may only combine powers of the "
                "same axis derivative (the operator class admits pure d_k^i terms only)"
            )
        terms = {}
        for (k1, i1), v1 in self.terms.items():
            for (_, i2), v2 in other.terms.items():
                key = (k1, i1 + i2)
                terms[key] = terms.get(key, Fraction(0)) + v1 * v2
        return OpEntry(0, terms)

    def __pow__(self, n: int):
        out = OpEntry(1)
        for _ in range(n):
            out = out * self
        return out


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"cannot tokenize {text[pos:]!r}")
            break
        pos = m.end()
        if m.group("num"):
            if "." in m.group("num"):
                raise ParseError(
                    f"decimal literal {m.group('num')!r} is not exact; write a rational like 3/10"
                )
            out.append(("num", m.group("num")))
        elif m.group("name"):
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    out.append(("end", ""))
    return out


class _ExprParser:
    """Recursive-descent evaluation of +,-,*,/,^ expressions.

    The environment maps names to Fraction, Poly or OpEntry values; evaluation
    happens during parsing, so type errors surface with the offending name.
    """

    def __init__(self, text: str, env: Dict[str, object], what: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.env = env
        self.what = what
        self.text = text

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op: str):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        val = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input in {self.text!r}")
        return val

    def expr(self):
        val = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            val = _add(val, rhs) if op == "+" else _add(val, _neg(rhs))
        return val

    def term(self):
        val = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.unary()
            val = _mul(val, rhs) if op == "*" else _div(val, rhs)
        return val

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return _neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            neg = False
            if (kind, val) == ("op", "-"):
                neg = True
                kind, val = self.take()
            if kind != "num":
                raise ParseError(f"exponent must be an integer literal in {self.text!r}")
            n = int(val)
            if neg:
                raise ParseError("negative exponents are not supported")
            return _pow(base, n)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Fraction(int(val))
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "name":
            if val in self.env:
                return self.env[val]
            if re.fullmatch(r"z[0-9]+", val):
                raise ParseError(f"unknown coordinate {val!r} in {self.what}")
            if re.fullmatch(r"d[0-9]+", val):
                raise ParseError(f"derivative token {val!r} is not allowed in {self.what}")
            raise ParseError(f"constant {val!r} has no binding (in {self.what})")
        raise ParseError(f"unexpected token in {self.text!r}")


def _add(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    if isinstance(a, OpEntry) or isinstance(b, OpEntry):
        a = a if isinstance(a, OpEntry) else OpEntry(a)
        b = b if isinstance(b, OpEntry) else OpEntry(b)
        return a + b
    if isinstance(a, Poly) or isinstance(b, Poly):
        return a + b
    raise ParseError("cannot add these values")


def _neg(a):
    return -a


def _mul(a, b):
    if isinstance(a, OpEntry) or isinstance(b, OpEntry):
        if isinstance(a, Poly) or isinstance(b, Poly):
            raise ParseError("operator coefficients must be constants, not coordinates")
        a = a if isinstance(a, OpEntry) else OpEntry(a)
        b = b if isinstance(b, OpEntry) else OpEntry(b)
        return a * b
    return a * b


def _div(a, b):
    if isinstance(b, Fraction):
        if b == 0:
            raise ParseError("division by zero")
        if isinstance(a, OpEntry):
            return a * (1 / b)
        return a * Fraction(1, 1) / b if isinstance(a, Fraction) else a * (1 / b)
    raise ParseError("can only divide by rational constants")


def _pow(a, n: int):
    if isinstance(a, (Fraction, Poly, OpEntry)):
        return a**n
    raise ParseError("cannot exponentiate this value")


def eval_scalar(text: str, params: Dict[str, Fraction], what: str) -> Fraction:
    env = dict(params)
    val = _ExprParser(text, env, what).parse()
    if not isinstance(val, Fraction):
        raise ParseError(f"expected a rational value in {what}, got {text!r}")
    return val


def eval_poly(text: str, coords: Tuple[str, ...], params: Dict[str, Fraction], what: str) -> Poly:
    env: Dict[str, object] = dict(params)
    for c in coords:
        env[c] = Poly.variable(coords, c)
    val = _ExprParser(text, env, what).parse()
    if isinstance(val, Fraction):
        return Poly.constant(coords, val)
    if isinstance(val, Poly):
        return val
    raise ParseError(f"expected a polynomial in {what}, got {text!r}")


def eval_op_entry(text: str, ell: int, params: Dict[str, Fraction], what: str) -> OpEntry:
    env: Dict[str, object] = dict(params)
    for k in range(1, ell + 1):
        env[f"d{k}"] = OpEntry.token(k)
    val = _ExprParser(text, env, what).parse()
    if isinstance(val, Fraction):
        return OpEntry(val)
    if isinstance(val, OpEntry):
        return val
    raise ParseError(f"expected an operator entry in {what}, got {text!r}")


# ---------------------------------------------------------------------------
# File-level parsing
# ---------------------------------------------------------------------------


def _split_sections(text: str):
    header: Dict[str, str] = {}
    sections: Dict[str, List[str]] = {}
    current: Optional[str] = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[([a-zA-Z0-9_]+)\]", line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            if "=" not in line:
                raise ParseError(f"expected 'key = value' before sections, got {line!r}")
            k, v = line.split("=", 1)
            header[k.strip()] = v.strip()
        else:
            sections[current].append(line)
    return header, sections


def _kv_lines(lines: List[str], section: str) -> Dict[str, str]:
    out = {}
    for line in lines:
        if "=" not in line:
            raise ParseError(f"expected 'key = value' in [{section}], got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def parse_model(text: str) -> KinematicModel:
    header, sections = _split_sections(text)
    version = header.get("version", str(FORMAT_VERSION))
    if version.strip() != str(FORMAT_VERSION):
        raise ParseError(f"unsupported model format version {version!r}")
    name = header.get("name", "model")

    for required in ("coords", "domain", "section", "lambda1", "lambda2", "F", "C"):
        if required not in sections:
            raise ParseError(f"missing required section [{required}]")

    coords_kv = _kv_lines(sections["coords"], "coords")
    dist = tuple(coords_kv.get("distributed", "").split())
    comp = tuple(coords_kv.get("complementary", "").split())
    if not dist:
        raise ParseError("no distributed coordinates declared")
    for c in dist + comp:
        if c not in ("z1", "z2", "z3"):
            raise ParseError(f"unknown coordinate {c!r} (coordinates are z1, z2, z3)")
    if set(dist) & set(comp):
        raise ParseError("distributed and complementary coordinate sets overlap")

    # params first: every later section may reference them
    params: Dict[str, Fraction] = {}
    for line in sections.get("params", []):
        if "=" not in line:
            raise ParseError(f"expected 'name = value' in [params], got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        params[k] = eval_scalar(v, params, f"parameter {k}")
    if "rho" not in params:
        raise ParseError("density parameter 'rho' is required in [params]")

    domain = _parse_domain(_kv_lines(sections["domain"], "domain"), dist, params)
    section = _parse_section(sections["section"], params)

    lam1 = _parse_poly_matrix(sections["lambda1"], comp, params, "lambda1")
    lam2 = _parse_poly_matrix(sections["lambda2"], comp, params, "lambda2")
    op = _parse_operator(sections["F"], dist, params)

    cmat = _parse_cmat(sections["C"], params)
    bd = None
    if "Bd" in sections:
        bd = [
            [eval_scalar(e, params, "Bd") for e in _split_entries(line)]
            for line in sections["Bd"]
        ]

    r_names, free_fields, structure, strain_check = _parse_structure(
        sections.get("structure"), op.n, dist
    )

    model = KinematicModel(
        name=name,
        dist=dist,
        comp=comp,
        domain=domain,
        section=section,
        lambda1=lam1,
        lambda2=lam2,
        op=op,
        cmat=cmat,
        rho=params["rho"],
        bd=bd,
        params=params,
        r_names=r_names,
        free_fields=free_fields,
        structure=structure,
        strain_check=strain_check,
    )
    return model


def _split_entries(line: str) -> List[str]:
    entries = [e.strip() for e in line.split(",")]
    if any(not e for e in entries):
        raise ParseError(f"empty entry in row {line!r}")
    return entries


def _parse_domain(kv: Dict[str, str], dist, params) -> DomainSpec:
    def nums(text, count):
        vals = [eval_scalar(v, params, "domain") for v in _split_entries(text)]
        if len(vals) != count:
            raise ParseError(f"domain needs {count} bounds, got {len(vals)}")
        return vals

    if "interval" in kv:
        a, b = nums(kv["interval"], 2)
        return DomainSpec((dist[0],), ((a, b),))
    if "rectangle" in kv:
        a, b, c, d = nums(kv["rectangle"], 4)
        return DomainSpec(tuple(dist), ((a, b), (c, d)))
    if "box" in kv:
        v = nums(kv["box"], 6)
        return DomainSpec(tuple(dist), ((v[0], v[1]), (v[2], v[3]), (v[4], v[5])))
    raise ParseError("domain must declare interval, rectangle or box")


def _parse_section(lines: List[str], params):
    kv = _kv_lines([l for l in lines if "=" in l], "section")
    bare = [l for l in lines if "=" not in l]
    if bare == ["none"] and not kv:
        return PointSection()
    if "interval" in kv:
        return IntervalSection(eval_scalar(kv["interval"], params, "section"))
    if "rectangle" in kv:
        b, h = (eval_scalar(v, params, "section") for v in _split_entries(kv["rectangle"]))
        return RectangleSection(b, h)
    if "circle" in kv:
        return CircleSection(eval_scalar(kv["circle"], params, "section"))
    if "moments" in kv:
        moments = {}
        for item in _split_entries(kv["moments"]):
            if ":" not in item:
                raise ParseError(f"moment entries look like 'I0: value', got {item!r}")
            key, val = (s.strip() for s in item.split(":", 1))
            if not re.fullmatch(r"I\d+", key):
                raise ParseError(f"bad moment name {key!r}")
            moments[int(key[1:])] = eval_scalar(val, params, "section")
        return MomentSection(moments)
    raise ParseError("section must declare interval, rectangle, circle, moments or none")


def _parse_poly_matrix(lines, comp, params, what) -> PolyMatrix:
    rows = []
    for line in lines:
        rows.append([eval_poly(e, comp, params, what) for e in _split_entries(line)])
    return PolyMatrix(rows)


def _parse_operator(lines, dist, params) -> DiffOpMatrix:
    ell = len(dist)
    grid = []
    for line in lines:
        grid.append([eval_op_entry(e, ell, params, "F") for e in _split_entries(line)])
    m = len(grid)
    n = len(grid[0])
    if any(len(r) != n for r in grid):
        raise ParseError("ragged operator matrix")
    p0 = [[grid[r][c].c0 for c in range(n)] for r in range(m)]
    pk: Dict[Tuple[int, int], list] = {}
    for r in range(m):
        for c in range(n):
            for (k, i), v in grid[r][c].terms.items():
                mat_ = pk.setdefault((k, i), [[Fraction(0)] * n for _ in range(m)])
                mat_[r][c] = v
    return DiffOpMatrix(m, n, tuple(dist), p0=p0, pk=pk)


def _parse_cmat(lines, params):
    kv_lines = [l for l in lines if l.replace(" ", "").startswith("preset=")]
    if kv_lines:
        preset = kv_lines[0].split("=", 1)[1].strip()
        if preset not in CONSTITUTIVE_PRESETS:
            raise ParseError(
                f"unknown constitutive preset {preset!r}; known: {sorted(CONSTITUTIVE_PRESETS)}"
            )
        func, needed = CONSTITUTIVE_PRESETS[preset]
        missing = [p for p in needed if p not in params]
        if missing:
            raise ParseError(f"preset {preset!r} needs parameters {missing}")
        return func(*(params[p] for p in needed))
    rows = [[eval_scalar(e, params, "C") for e in _split_entries(line)] for line in lines]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ParseError("constitutive matrix must be square")
    return rows


def _parse_structure(lines, n, dist):
    if lines is None:
        return (), (), (), True
    kv = _kv_lines(lines, "structure")
    names = tuple(s.strip() for s in kv.get("names", "").split(",")) if "names" in kv else ()
    fields = tuple(s.strip() for s in kv["fields"].split(",")) if "fields" in kv else ()
    strain_check = kv.get("strain_check", "true").strip().lower() != "false"
    structure: List[tuple] = []
    if "r" in kv:
        if not fields:
            raise ParseError("[structure] with an r line needs a fields line")
        for item in _split_entries(kv["r"]):
            m = re.fullmatch(r"d(\d+)\((\w+)\)", item)
            if m:
                axis = int(m.group(1))
                fname = m.group(2)
                if fname not in fields:
                    raise ParseError(f"unknown free field {fname!r} in structure")
                if not 1 <= axis <= len(dist):
                    raise ParseError(f"axis d{axis} out of range in structure")
                structure.append(("d", fields.index(fname), axis))
            else:
                if item not in fields:
                    raise ParseError(f"unknown free field {item!r} in structure")
                structure.append(("free", fields.index(item)))
        if len(structure) != n:
            raise ParseError(f"structure r line has {len(structure)} entries, operator expects {n}")
    return names, fields, tuple(structure), strain_check


def parse_model_file(path: str) -> KinematicModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt_fraction(x: Fraction) -> str:
    return str(x)


def serialize_model(model: KinematicModel) -> str:
    out: List[str] = []
    out.append(f"version = {FORMAT_VERSION}")
    out.append(f"name = {model.name}")
    out.append("")
    out.append("[coords]")
    out.append(f"distributed = {' '.join(model.dist)}")
    out.append(f"complementary = {' '.join(model.comp)}")
    out.append("")
    out.append("[domain]")
    kind = {1: "interval", 2: "rectangle", 3: "box"}[model.domain.ell]
    bounds = ", ".join(f"{lo}, {hi}" for lo, hi in model.domain.bounds)
    out.append(f"{kind} = {bounds}")
    out.append("")
    out.append("[section]")
    out.append(model.section.descriptor() if model.section.kind != "none" else "none")
    out.append("")
    if model.params:
        out.append("[params]")
        for k in sorted(model.params):
            out.append(f"{k} = {_fmt_fraction(model.params[k])}")
        if "rho" not in model.params:
            out.append(f"rho = {model.rho}")
        out.append("")
    else:
        out.append("[params]")
        out.append(f"rho = {model.rho}")
        out.append("")
    out.append("[lambda1]")
    out.extend(_poly_rows_text(model.lambda1))
    out.append("")
    out.append("[lambda2]")
    out.extend(_poly_rows_text(model.lambda2))
    out.append("")
    out.append("[F]")
    for r in range(model.m):
        out.append(", ".join(model.op.entry_str(r, c) for c in range(model.n)))
    out.append("")
    out.append("[C]")
    for row in model.cmat:
        out.append(", ".join(_fmt_fraction(x) for x in row))
    out.append("")
    if model.bd is not None:
        out.append("[Bd]")
        for row in model.bd:
            out.append(", ".join(_fmt_fraction(x) for x in row))
        out.append("")
    out.append("[structure]")
    out.append(f"names = {', '.join(model.r_names)}")
    out.append(f"fields = {', '.join(model.free_fields)}")
    r_items = []
    for comp_spec in model.structure:
        if comp_spec[0] == "free":
            r_items.append(model.free_fields[comp_spec[1]])
        else:
            _, j, axis = comp_spec
            r_items.append(f"d{axis}({model.free_fields[j]})")
    out.append(f"r = {', '.join(r_items)}")
    if not model.strain_check:
        out.append("strain_check = false")
    out.append("")
    return "\n".join(out)


def _poly_rows_text(pm: PolyMatrix) -> List[str]:
    return [", ".join(str(p) for p in row) for row in pm.entries]
