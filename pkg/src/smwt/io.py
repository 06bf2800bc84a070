"""Instance files: the canonical format, benchmark adapters and a generator.

Canonical format, all integers separated by whitespace::

    n
    p_1 .. p_n
    w_1 .. w_n
    d_1 .. d_n
    s[0][0] .. s[0][n]      (n + 1 rows, row 0 is the dummy job)
    ...
    s[n][0] .. s[n][n]
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Instance


class InstanceParseError(ValueError):
    """Malformed instance text; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int

    def as_int(self, what: str, allow_negative: bool = False) -> int:
        try:
            value = int(self.text)
        except ValueError:
            raise InstanceParseError(f"{what}: expected an integer, got {self.text!r}", self.line, self.column) from None
        if value < 0 and not allow_negative:
            raise InstanceParseError(f"{what}: negative value {value}", self.line, self.column)
        return value


def _tokens(line: str, lineno: int) -> list[_Token]:
    return [_Token(m.group(), lineno, m.start() + 1) for m in re.finditer(r"\S+", line)]


# --------------------------------------------------------------------------
# canonical format


def parse_canonical(text: str) -> Instance:
    rows = [(k, _tokens(line, k)) for k, line in enumerate(text.splitlines(), start=1)]
    rows = [(k, toks) for k, toks in rows if toks]
    if not rows:
        raise InstanceParseError("empty input, expected the job count", 1)

    lineno, head = rows[0]
    if len(head) != 1:
        raise InstanceParseError(f"first line must hold only n, found {len(head)} tokens", lineno, head[1].column)
    n = head[0].as_int("n")
    if n < 1:
        raise InstanceParseError("n must be positive", lineno, head[0].column)

    expected_lines = 4 + (n + 1)
    if len(rows) != expected_lines:
        k = rows[-1][0] + 1 if len(rows) < expected_lines else rows[expected_lines][0]
        setup_rows = max(len(rows) - 4, 0)
        raise InstanceParseError(
            f"expected {expected_lines} non-empty lines (setup matrix of {n + 1} rows), "
            f"found {len(rows)} ({setup_rows} setup rows)",
            k,
        )

    def vector(idx: int, name: str, width: int) -> list[int]:
        k, toks = rows[idx]
        if len(toks) != width:
            col = toks[width].column if len(toks) > width else toks[-1].column + len(toks[-1].text)
            raise InstanceParseError(f"{name}: expected {width} values, found {len(toks)}", k, col)
        return [t.as_int(f"{name}[{c}]") for c, t in enumerate(toks)]

    p = vector(1, "p", n)
    w = vector(2, "w", n)
    d = vector(3, "d", n)
    s = [vector(4 + r, f"s row {r}", n + 1) for r in range(n + 1)]
    return Instance(n, p, d, w, s)


def write_canonical(inst: Instance) -> str:
    def line(values) -> str:
        return " ".join(str(int(v)) for v in values)

    out = [str(inst.n), line(inst.p), line(inst.w), line(inst.d)]
    out.extend(line(row) for row in inst.s)
    return "\n".join(out) + "\n"


def read_instance(path: str | Path, dialect: str = "canonical") -> Instance:
    path = Path(path)
    text = path.read_text()
    if dialect == "canonical":
        inst = parse_canonical(text)
    else:
        inst = parse_benchmark(text, dialect)
    return Instance(inst.n, inst.p, inst.d, inst.w, inst.s, name=path.stem)


# --------------------------------------------------------------------------
# benchmark adapters

DIALECTS = ("cicirello", "unweighted")

# normalized label -> section
_LABELS = {
    "problemsize": "n",
    "size": "n",
    "n": "n",
    "jobs": "n",
    "numberofjobs": "n",
    "processtimes": "p",
    "processingtimes": "p",
    "processtime": "p",
    "processingtime": "p",
    "p": "p",
    "weights": "w",
    "weight": "w",
    "w": "w",
    "duedates": "d",
    "duedate": "d",
    "d": "d",
    "setuptimes": "s",
    "setups": "s",
    "setupmatrix": "s",
    "setuptime": "s",
    "s": "s",
}
# header fields that carry no instance data
_IGNORED = {"probleminstance", "instance", "tau", "r", "eta", "maxsetup", "name", "seed"}
_BLOCK_START = "begingeneratorstate"
_BLOCK_END = "endgeneratorstate"

_LABEL_RE = re.compile(r"^\s*([A-Za-z][A-Za-z _\-]*?)\s*(?::|$)(.*)$")


def _normalize(label: str) -> str:
    return re.sub(r"[^a-z]", "", label.lower())


def parse_benchmark(text: str, dialect: str) -> Instance:
    """Map a labelled benchmark file onto an :class:`Instance`.

    Sections start at a label line (``Process Times:``, ``Due Dates``, ...);
    data may follow on the same line or on later lines.  Setup times may be
    given as a full ``(n+1)`` square matrix, as an ``n x n`` matrix without
    the dummy row, or as ``from to value`` triples.  The ``unweighted``
    dialect forces every weight to 1.
    """
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}, expected one of {DIALECTS}")
    sections: dict[str, list[_Token]] = {}
    section_lines: dict[str, int] = {}
    current: str | None = None
    skipping = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _LABEL_RE.match(raw)
        if m:
            key = _normalize(m.group(1))
            if skipping:
                skipping = key != _BLOCK_END
                continue
            if key == _BLOCK_START:
                skipping = True
                current = None
                continue
            if key in _IGNORED:
                current = None
                continue
            if key not in _LABELS:
                raise InstanceParseError(f"unknown label {m.group(1).strip()!r}", lineno, raw.index(m.group(1)[0]) + 1)
            current = _LABELS[key]
            if current in sections:
                raise InstanceParseError(f"section {m.group(1).strip()!r} appears twice", lineno)
            sections[current] = []
            section_lines[current] = lineno
            offset = m.start(2)
            sections[current].extend(
                _Token(t.text, lineno, t.column + offset) for t in _tokens(m.group(2), lineno)
            )
            continue
        if skipping:
            continue
        if current is None:
            raise InstanceParseError("data outside of any labelled section", lineno)
        sections[current].extend(_tokens(raw, lineno))

    last_line = max(1, len(text.splitlines()))
    for needed in ("p", "d", "s") + (("w",) if dialect == "cicirello" else ()):
        if needed not in sections:
            names = {"p": "processing times", "d": "due dates", "s": "setup times", "w": "weights"}
            raise InstanceParseError(f"missing section: {names[needed]}", last_line)

    p = [t.as_int("processing time") for t in sections["p"]]
    n = len(p)
    if "n" in sections:
        toks = sections["n"]
        if len(toks) != 1:
            raise InstanceParseError("problem size must be a single integer", section_lines["n"])
        declared = toks[0].as_int("problem size")
        if declared != n:
            raise InstanceParseError(
                f"problem size says {declared} jobs but {n} processing times were given", toks[0].line, toks[0].column
            )
    if n < 1:
        raise InstanceParseError("no processing times", section_lines["p"])

    def vector(key: str, what: str) -> list[int]:
        toks = sections[key]
        if len(toks) != n:
            raise InstanceParseError(f"{what}: expected {n} values, found {len(toks)}", section_lines[key])
        return [t.as_int(what) for t in toks]

    d = vector("d", "due date")
    if dialect == "unweighted":
        w = [1] * n
    else:
        w = vector("w", "weight")
    s = _setup_matrix(sections["s"], n, section_lines["s"])
    return Instance(n, p, d, w, s)


def _setup_matrix(toks: list[_Token], n: int, line: int) -> np.ndarray:
    s = np.zeros((n + 1, n + 1), dtype=np.int64)
    count = len(toks)
    if count == (n + 1) ** 2:
        vals = [t.as_int("setup time", allow_negative=True) for t in toks]
        s[:, :] = np.asarray(vals).reshape(n + 1, n + 1)
    elif count == n * n:
        # no initial setups given: the dummy row stays 0
        vals = [t.as_int("setup time", allow_negative=True) for t in toks]
        s[1:, 1:] = np.asarray(vals).reshape(n, n)
    elif count % 3 == 0 and count // 3 in (n * (n - 1), n * n, n * (n + 1)):
        triples = [
            (toks[k].as_int("setup from", True), toks[k + 1].as_int("setup to", True), toks[k + 2])
            for k in range(0, count, 3)
        ]
        lo = min(min(a, b) for a, b, _ in triples)
        hi = max(max(a, b) for a, b, _ in triples)
        # jobs numbered from 0 with -1 as the initial state, or from 0 without one
        if lo < 0:
            shift = -lo
        elif hi < n:
            shift = 1
        else:
            shift = 0
        for a, b, tok in triples:
            a, b = a + shift, b + shift
            if not (0 <= a <= n and 0 <= b <= n):
                raise InstanceParseError(f"setup index ({a - shift}, {b - shift}) out of range", tok.line, tok.column)
            s[a, b] = tok.as_int("setup time", allow_negative=(a == b))
    else:
        raise InstanceParseError(
            f"setup times: {count} values fit neither a {n + 1}x{n + 1} matrix, an {n}x{n} matrix nor index triples",
            line,
        )
    # the diagonal is never read; some files mark it with -1
    np.fill_diagonal(s, 0)
    s[:, 0] = np.maximum(s[:, 0], 0)
    if (s < 0).any():
        i, j = (int(x) for x in np.argwhere(s < 0)[0])
        raise InstanceParseError(f"negative setup time s[{i}][{j}]", line)
    return s


# --------------------------------------------------------------------------
# generator


@dataclass(frozen=True)
class GeneratorConfig:
    """Random instance parameters.

    ``tau`` sets due-date tightness, ``r`` the due-date range and ``eta`` the
    mean setup relative to the mean processing time.
    """

    n: int
    tau: float = 0.3
    r: float = 0.25
    eta: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if not 0.0 < self.r < 1.0:
            raise ValueError("r must lie in (0, 1)")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")


P_RANGE = (50, 150)
W_RANGE = (1, 10)


def max_setup(eta: float) -> int:
    return round(2 * eta * (P_RANGE[0] + P_RANGE[1]) / 2)


def due_date_window(gc: GeneratorConfig, p: np.ndarray, s: np.ndarray) -> tuple[int, int]:
    """Inclusive due-date range for processing times ``p`` and setups ``s``."""
    n = len(p)
    off = ~np.eye(n + 1, dtype=bool)
    off[:, 0] = False
    mean_setup = float(s[off].mean()) if off.any() else 0.0
    t_bar = float(p.sum()) + n * mean_setup
    lo = max(0, round(t_bar * (1 - gc.tau - gc.r / 2)))
    hi = round(t_bar * (1 - gc.tau + gc.r / 2))
    return lo, max(lo, hi)


def generate_instance(gc: GeneratorConfig) -> Instance:
    rng = np.random.default_rng(gc.seed)
    n = gc.n
    p = rng.integers(P_RANGE[0], P_RANGE[1] + 1, size=n)
    w = rng.integers(W_RANGE[0], W_RANGE[1] + 1, size=n)
    s = rng.integers(0, max_setup(gc.eta) + 1, size=(n + 1, n + 1))
    np.fill_diagonal(s, 0)
    s[:, 0] = 0
    lo, hi = due_date_window(gc, p, s)
    d = rng.integers(lo, hi + 1, size=n)
    name = f"gen_n{n}_t{gc.tau}_r{gc.r}_e{gc.eta}_s{gc.seed}"
    return Instance(n, p, d, w, s, name=name)
