"""Model formulas and the multi-factor distance components decomposition.

Formulas follow the usual linear-model notation::

    y ~ A + B + A:B        # same as  y ~ A*B
    y1, y2 ~ A * B * C     # multivariate response, full three-way model

Each term's component is the between dispersion of its crossed cells
minus the components of every model term nested inside it, so for
hierarchical models ``S(AB) = S(A:B) - S(A) - S(B)`` and the three-way
term follows the same inclusion-exclusion pattern.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .core_stats import IndexGroups
from .decomposition import DEFAULT_FAST_THRESHOLD, make_dispersion
from .errors import DataError, DegenerateError, DesignError, FormulaSyntaxError, UnknownColumnError

__all__ = [
    "ModelFormula",
    "TermRow",
    "DiscoTable",
    "TermStructure",
    "parse_formula",
    "cross_levels",
    "term_structure",
    "term_statistics",
    "decompose",
    "multiway_disco",
]

_TOKEN = re.compile(r"\s*(?:([A-Za-z_.][A-Za-z0-9_.]*)|(\S))")


@dataclass(frozen=True)
class ModelFormula:
    """Response columns and expanded model terms.

    Each term is a tuple of factor names; terms are ordered by interaction
    order and then by first appearance, so every term follows its subsets.
    """

    response: tuple
    terms: tuple
    expanded: bool = True

    @property
    def factors(self) -> tuple:
        seen: dict = {}
        for t in self.terms:
            for f in t:
                seen.setdefault(f, None)
        return tuple(seen)

    @staticmethod
    def label(term) -> str:
        return ":".join(term)

    def __str__(self):
        return f"{', '.join(self.response)} ~ {' + '.join(map(self.label, self.terms))}"


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break  # trailing whitespace
        start = m.start(1) if m.group(1) is not None else m.start(2)
        if m.group(1) is not None:
            tokens.append(("ident", m.group(1), start))
        elif m.group(2) in ",~+:*":
            tokens.append((m.group(2), m.group(2), start))
        else:
            raise FormulaSyntaxError(f"unexpected character {m.group(2)!r}", text, start)
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def parse_formula(text: str) -> ModelFormula:
    """Parse ``"y1, y2 ~ A * B + C"`` into an expanded :class:`ModelFormula`.

    ``*`` between k operands expands to all 2**k - 1 nonempty products;
    ``:`` forms a single interaction. Duplicate terms collapse.
    """
    tokens = _tokenize(text)
    i = 0

    def expect(kind, what):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise FormulaSyntaxError(f"expected {what}, found {found}", text, tok[2])
        i += 1
        return tok[1]

    response = [expect("ident", "response column name")]
    while tokens[i][0] == ",":
        i += 1
        response.append(expect("ident", "response column name"))
    dup = {r for r in response if response.count(r) > 1}
    if dup:
        raise FormulaSyntaxError(f"duplicate response column {sorted(dup)[0]!r}", text, 0)
    expect("~", "'~'")

    raw_terms = []
    while True:
        operands = [[expect("ident", "factor name")]]
        while tokens[i][0] in (":", "*"):
            op = tokens[i][0]
            i += 1
            name = expect("ident", "factor name")
            if op == ":":
                operands[-1].append(name)
            else:
                operands.append([name])
        for size in range(1, len(operands) + 1):
            for combo in itertools.combinations(operands, size):
                raw_terms.append([f for op in combo for f in op])
        if tokens[i][0] == "+":
            i += 1
            continue
        expect("end", "'+' or end of formula")
        break

    order: dict = {}
    for t in raw_terms:
        for f in t:
            order.setdefault(f, len(order))
    overlap = set(response) & set(order)
    if overlap:
        raise FormulaSyntaxError(f"column {sorted(overlap)[0]!r} is both response and factor", text, 0)
    unique: dict = {}
    for t in raw_terms:
        key = frozenset(t)
        unique.setdefault(key, tuple(sorted(key, key=order.__getitem__)))
    terms = sorted(unique.values(), key=len)
    return ModelFormula(tuple(response), tuple(terms))


def cross_levels(factors: Sequence) -> IndexGroups:
    """Group observations by their combination of factor levels.

    Accepts :class:`IndexGroups` or plain label sequences. Only observed
    level combinations become cells; cell order is first appearance.
    """
    if not factors:
        raise DataError("need at least one factor")
    cols = [f if isinstance(f, IndexGroups) else IndexGroups.from_labels(list(f)) for f in factors]
    n = cols[0].n
    if any(c.n != n for c in cols):
        raise DataError("factor assignments differ in length")
    if len(cols) == 1:
        return cols[0]
    keys = list(zip(*(c.codes.tolist() for c in cols)))
    cells = IndexGroups.from_labels(keys)
    levels = tuple(tuple(c.levels[j] for c, j in zip(cols, key)) for key in cells.levels)
    return IndexGroups(cells.codes, levels)


@dataclass(frozen=True)
class TermRow:
    term: str
    df: int
    sum_dispersion: float
    f_ratio: float
    p_value: float | None = None

    @property
    def mean_dispersion(self) -> float:
        return self.sum_dispersion / self.df


@dataclass(frozen=True)
class DiscoTable:
    """Distance components table: one row per model term plus within and total."""

    alpha: float
    rows: tuple
    within_df: int
    within: float
    total_df: int
    total: float
    notes: tuple = field(default=())

    @property
    def mean_within(self) -> float:
        return self.within / self.within_df

    def row(self, term: str) -> TermRow:
        for r in self.rows:
            if r.term == term:
                return r
        raise KeyError(term)

    def with_p_values(self, p_values, note=None) -> "DiscoTable":
        rows = tuple(replace(r, p_value=float(p)) for r, p in zip(self.rows, p_values))
        notes = self.notes + ((note,) if note else ())
        return replace(self, rows=rows, notes=notes)


@dataclass(frozen=True)
class TermStructure:
    """Design information needed to evaluate the decomposition under relabelings."""

    labels: tuple
    codes: tuple          # cell codes per term
    n_cells: tuple
    df: tuple
    nested: tuple         # indices of earlier model terms that are proper subsets
    within_df: int
    n: int


def _model_rank(cells: Sequence[IndexGroups], n: int) -> int:
    cols = [np.ones((n, 1))] + [c.indicator() for c in cells]
    return int(np.linalg.matrix_rank(np.hstack(cols)))


def term_structure(factors: Mapping[str, IndexGroups], formula: ModelFormula) -> TermStructure:
    """Validate the design and work out cells, degrees of freedom and nesting."""
    for f in formula.factors:
        if f not in factors:
            raise UnknownColumnError(f, tuple(factors))
    sizes = {factors[f].n for f in formula.factors}
    if len(sizes) != 1:
        raise DataError("factor columns differ in length")
    (n,) = sizes
    cells, dfs, nested = [], [], []
    for ti, term in enumerate(formula.terms):
        g = cross_levels([factors[f] for f in term])
        if g.k < 2:
            raise DesignError(f"factor has one level: term {ModelFormula.label(term)!r}")
        expected = int(np.prod([factors[f].k for f in term]))
        if len(term) > 1 and g.k < expected:
            raise DesignError(
                f"incomplete design: interaction {ModelFormula.label(term)!r} "
                f"has {g.k} of {expected} cells observed"
            )
        inner = tuple(si for si in range(ti) if set(formula.terms[si]) < set(term))
        cells.append(g)
        nested.append(inner)
        dfs.append(g.k - 1 - sum(dfs[si] for si in inner))
    within_df = n - _model_rank(cells, n)
    if within_df < 1:
        raise DesignError(f"no residual degrees of freedom (N={n}, residual df={within_df})")
    return TermStructure(
        labels=tuple(ModelFormula.label(t) for t in formula.terms),
        codes=tuple(g.codes for g in cells),
        n_cells=tuple(g.k for g in cells),
        df=tuple(dfs),
        nested=tuple(nested),
        within_df=within_df,
        n=n,
    )


def term_statistics(disp, structure: TermStructure, perms=None):
    """Term components, within dispersion and F ratios for each relabeling.

    ``perms`` is an (R, N) array of permutations applied jointly to all
    factor columns; ``None`` evaluates the observed design only. Returns
    ``(components (R, terms), within (R,), f (R, terms))``. Replicates with
    zero within dispersion get an infinite F ratio.
    """
    if perms is None:
        perms = np.arange(structure.n)[None, :]
    perms = np.atleast_2d(perms)
    total = disp.total
    comps = np.empty((perms.shape[0], len(structure.labels)))
    for ti, (codes, k) in enumerate(zip(structure.codes, structure.n_cells)):
        between = total - disp.within(codes[perms], k)
        comps[:, ti] = between - comps[:, list(structure.nested[ti])].sum(axis=1)
    within = total - comps.sum(axis=1)
    df = np.asarray(structure.df, dtype=float)
    mean_w = within / structure.within_df
    degenerate = within <= 1e-12 * total
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (comps / df) / mean_w[:, None]
    f[degenerate] = np.inf
    return comps, within, f


def decompose(disp, factors: Mapping[str, IndexGroups], formula: ModelFormula,
              structure: TermStructure | None = None) -> DiscoTable:
    """Observed decomposition table for a dispersion back-end."""
    if structure is None:
        structure = term_structure(factors, formula)
    if disp.n != structure.n:
        raise DataError(f"response has {disp.n} rows, factors have {structure.n}")
    comps, within, f = term_statistics(disp, structure)
    comps, within, f = comps[0], float(within[0]), f[0]
    total = disp.total
    if total == 0.0:
        raise DegenerateError("all observations identical; F ratio undefined")
    tol = 1e-9 * total
    for label, c in zip(structure.labels, comps):
        if c < -tol:
            raise DesignError(
                f"component for {label!r} is negative ({c:.6g}); "
                "the design is not orthogonal enough for this decomposition"
            )
    if within < -tol:
        raise DesignError(
            f"within dispersion is negative ({within:.6g}); "
            "the design is not orthogonal enough for this decomposition"
        )
    if within <= 1e-12 * total:
        raise DegenerateError("degenerate within-dispersion (W = 0); F ratio undefined")
    rows = tuple(
        TermRow(label, int(df), float(c), float(fr))
        for label, df, c, fr in zip(structure.labels, structure.df, comps, f)
    )
    return DiscoTable(disp.alpha, rows, structure.within_df, within, structure.n - 1, total)


def multiway_disco(data, factors: Mapping[str, IndexGroups], formula, alpha: float = 1.0,
                   fast_threshold: int | None = DEFAULT_FAST_THRESHOLD) -> DiscoTable:
    """Distance components table for a factorial model.

    Parameters
    ----------
    data : (N, p) array_like
        Response observations.
    factors : mapping of str to IndexGroups
        Factor columns by name.
    formula : ModelFormula or str
    alpha : float
        Index in (0, 2].
    fast_threshold : int, optional
        Use the sorted univariate path for index 1 above this many
        observations; ``None`` always uses the distance matrix.
    """
    if isinstance(formula, str):
        formula = parse_formula(formula)
    structure = term_structure(factors, formula)
    disp = make_dispersion(data, alpha, fast_threshold)
    return decompose(disp, factors, formula, structure)
