"""CPLEX-LP export of the 0-1 embedding program, and a reader for the same subset.

Variables (all binary):

* ``x_<i>``        request i admitted
* ``x_c<c>``       chain c selected
* ``x_c<c>_r<i>``  request i routed through chain c (only when c is a candidate of i)
* ``x_v<v>``       node v used by some selected chain

Row families are prefixed ``c2_`` (assignment), ``c4_`` (chain implies node),
``c5_`` (node implies some chain) and ``c6_`` (capacity). Restricting requests
to their candidate chains needs no rows: the variables for non-candidate
pairs are simply never created.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .validation import check_instance

TERMS_PER_LINE = 8


def _terms(pairs):
    """Render ``[(coef, var), ...]`` as an LP linear expression."""
    out = []
    for k, (coef, var) in enumerate(pairs):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        term = var if mag == 1 else f"{mag} {var}"
        if k == 0:
            out.append(term if sign == "+" else f"- {term}")
        else:
            out.append(f"{sign} {term}")
    return out


def _row(name, pairs, sense, rhs):
    terms = _terms(pairs)
    lines = []
    for k in range(0, max(len(terms), 1), TERMS_PER_LINE):
        lines.append(" ".join(terms[k : k + TERMS_PER_LINE]))
    lines[0] = f" {name}: {lines[0]}".rstrip()
    for k in range(1, len(lines)):
        lines[k] = f"   {lines[k]}"
    lines[-1] = f"{lines[-1]} {sense} {rhs}"
    return lines


def export_ilp(instance):
    instance = check_instance(instance)
    cands = instance.candidates
    chains = instance.chain_universe()
    chain_id = {c: k for k, c in enumerate(chains)}
    k_req = len(cands)
    nodes = range(instance.node_count)

    pairs_of_request = [[chain_id[c] for c in cs] for cs in cands]
    pairs_of_chain = [[] for _ in chains]
    for i, ids in enumerate(pairs_of_request):
        for c in ids:
            pairs_of_chain[c].append(i)
    chains_at_node = [[] for _ in nodes]
    for c, chain in enumerate(chains):
        for v in sorted(set(chain)):
            chains_at_node[v].append(c)

    lines = ["\\ service chain embedding: maximise admitted requests", "Maximize"]
    objective = _terms([(1, f"x_{i}") for i in range(k_req)])
    lines.append(f" obj: {' '.join(objective[:TERMS_PER_LINE])}".rstrip())
    for k in range(TERMS_PER_LINE, len(objective), TERMS_PER_LINE):
        lines.append("   " + " ".join(objective[k : k + TERMS_PER_LINE]))
    lines.append("Subject To")
    for i in range(k_req):
        pairs = [(1, f"x_{i}")] + [(-1, f"x_c{c}_r{i}") for c in pairs_of_request[i]]
        lines += _row(f"c2_r{i}", pairs, "=", 0)
    for c, chain in enumerate(chains):
        for v in sorted(set(chain)):
            lines += _row(f"c4_c{c}_v{v}", [(1, f"x_c{c}"), (-1, f"x_v{v}")], "<=", 0)
    for v in nodes:
        pairs = [(1, f"x_c{c}") for c in chains_at_node[v]] + [(-1, f"x_v{v}")]
        lines += _row(f"c5_v{v}", pairs, ">=", 0)
    for v in nodes:
        pairs = [(1, f"x_c{c}_r{i}") for c in chains_at_node[v] for i in pairs_of_chain[c]]
        pairs.append((-instance.capacities[v], f"x_v{v}"))
        lines += _row(f"c6_v{v}", pairs, "<=", 0)
    lines.append("Binary")
    names = [f"x_{i}" for i in range(k_req)]
    names += [f"x_c{c}" for c in range(len(chains))]
    names += [f"x_c{c}_r{i}" for i in range(k_req) for c in pairs_of_request[i]]
    names += [f"x_v{v}" for v in nodes]
    lines += [f" {name}" for name in names]
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class LPRow:
    name: str
    coefficients: dict
    sense: str
    rhs: float


@dataclass
class LPModel:
    sense: str
    objective: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    binaries: list = field(default_factory=list)

    @property
    def variables(self):
        seen = dict.fromkeys(self.binaries)
        for row in self.rows:
            seen.update(dict.fromkeys(row.coefficients))
        seen.update(dict.fromkeys(self.objective))
        return list(seen)


_SECTIONS = {
    "maximize": "obj",
    "maximise": "obj",
    "minimize": "obj",
    "minimise": "obj",
    "subject to": "rows",
    "st": "rows",
    "s.t.": "rows",
    "binary": "bin",
    "binaries": "bin",
    "end": "end",
}
_NUMBER = r"[0-9.]+(?:[eE][+-]?[0-9]+)?"
_TOKEN = re.compile(rf"[A-Za-z_][\w.\[\]]*:|<=|>=|=<|=>|=|[+-]|[A-Za-z_][\w.\[\]]*|{_NUMBER}")


def _linear(tokens):
    coeffs = {}
    sign, coef = 1, None
    for tok in tokens:
        if tok in "+-":
            sign = -1 if tok == "-" else 1
        elif re.fullmatch(_NUMBER, tok):
            coef = float(tok)
        else:
            value = sign * (1.0 if coef is None else coef)
            coeffs[tok] = coeffs.get(tok, 0.0) + value
            sign, coef = 1, None
    return coeffs


def parse_lp(text):
    """Read the LP subset written by :func:`export_ilp`."""
    model = LPModel(sense="max")
    section = None
    chunks = []  # (section, name, tokens)
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "obj":
                model.sense = "max" if key.startswith("max") else "min"
            continue
        if section == "bin":
            model.binaries.extend(line.split())
            continue
        for tok in _TOKEN.findall(line):
            if tok.endswith(":"):
                chunks.append([section, tok[:-1], []])
            else:
                if not chunks or chunks[-1][0] != section:
                    chunks.append([section, None, []])
                chunks[-1][2].append(tok)
    for section, name, tokens in chunks:
        if section == "obj":
            model.objective = _linear(tokens)
            continue
        for k, tok in enumerate(tokens):
            if tok in ("<=", ">=", "=", "=<", "=>"):
                sense = {"=<": "<=", "=>": ">="}.get(tok, tok)
                rest = tokens[k + 1 :]
                rhs = -float(rest[1]) if rest[0] == "-" else float(rest[-1])
                model.rows.append(LPRow(name, _linear(tokens[:k]), sense, rhs))
                break
        else:
            raise ValueError(f"row {name!r} has no comparison operator")
    return model
