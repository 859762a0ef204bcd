"""Oracle problems: Bob's setting set, the black-box answer map and the solution map.

Bit strings are held as Python ints together with an explicit width. The
leftmost character of a bit string is its most significant bit, so
lexicographic order of equal-width strings is numeric order.

Two setting encodings exist. ``compact`` settings are the hidden datum
itself (Grover, Bernstein-Vazirani). ``table`` settings are the function
table: the concatenation of the answers over the query domain, in domain
order (Deutsch-Jozsa, Simon).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidSubsetError, ProblemFileError, SizeLimitError

COMPACT = "compact"
TABLE = "table"


def fmt_bits(value: int, width: int) -> str:
    if width == 0:
        return ""
    return format(value, f"0{width}b")


def parse_bits(text: str, width: int) -> int:
    """Parse a binary string (or ``0x`` hex) of the given width."""
    text = text.strip()
    if text.lower().startswith("0x"):
        value = int(text[2:], 16)
        if value >> width:
            raise ValueError(f"{text!r} does not fit in {width} bits")
        return value
    if len(text) != width or set(text) - {"0", "1"}:
        raise ValueError(f"{text!r} is not a {width}-bit binary string")
    return int(text, 2) if width else 0


@dataclass(frozen=True)
class SettingSet:
    """Canonically ordered, duplicate-free set of equal-width settings."""

    members: tuple[int, ...]
    width: int

    def __post_init__(self):
        if not self.members:
            raise InvalidSubsetError("setting set must be nonempty")
        if any(b < 0 or b >> self.width for b in self.members):
            raise InvalidSubsetError(f"setting wider than {self.width} bits")
        if any(x >= y for x, y in zip(self.members, self.members[1:])):
            raise InvalidSubsetError("settings must be distinct and sorted")

    @classmethod
    def of(cls, members: Iterable[int | str], width: int) -> "SettingSet":
        vals = {parse_bits(m, width) if isinstance(m, str) else int(m) for m in members}
        return cls(tuple(sorted(vals)), width)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, b):
        return b in self.members

    def labels(self) -> list[str]:
        return [fmt_bits(b, self.width) for b in self.members]


@dataclass(frozen=True, eq=False)
class OracleProblem:
    """An oracle problem at desk scale, with all answers tabulated.

    ``answers[i, j]`` is f_b(a) for b = ``settings[i]`` and a = ``domain[j]``;
    ``solutions[i]`` is s(b). Instances hash by identity so per-problem
    caches can key on them.
    """

    name: str
    setting_width: int
    settings: np.ndarray
    arg_width: int
    domain: np.ndarray
    answer_width: int
    answers: np.ndarray
    solution_width: int
    solutions: np.ndarray
    encoding: str
    solution_labels: Mapping[int, str] | None = None
    notes: tuple[str, ...] = ()
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n_set, n_dom = len(self.settings), len(self.domain)
        if n_set == 0:
            raise InvalidSubsetError("problem has an empty setting set")
        if self.answers.shape != (n_set, n_dom):
            raise ValueError(f"answer table shape {self.answers.shape} != {(n_set, n_dom)}")
        if self.solutions.shape != (n_set,):
            raise ValueError("one solution per setting required")
        if np.any(np.diff(self.settings) <= 0):
            raise ValueError("settings must be strictly increasing")
        if self.encoding not in (COMPACT, TABLE):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        self._index.update({int(b): i for i, b in enumerate(self.settings)})

    @property
    def sigma(self) -> SettingSet:
        return SettingSet(tuple(int(b) for b in self.settings), self.setting_width)

    def index_of(self, b: int) -> int:
        try:
            return self._index[b]
        except KeyError:
            raise InvalidSubsetError(f"{fmt_bits(b, self.setting_width)} is not in sigma") from None

    def answer(self, b: int, a: int) -> int:
        j = np.searchsorted(self.domain, a)
        if j == len(self.domain) or self.domain[j] != a:
            raise ValueError(f"argument {fmt_bits(a, self.arg_width)} not in the query domain")
        return int(self.answers[self.index_of(b), j])

    def solution(self, b: int) -> int:
        return int(self.solutions[self.index_of(b)])

    def setting_label(self, b: int) -> str:
        return fmt_bits(b, self.setting_width)

    def solution_label(self, s: int) -> str:
        if self.solution_labels and s in self.solution_labels:
            return self.solution_labels[s]
        return fmt_bits(s, self.solution_width)


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """``base`` with its setting set replaced by ``subset``; maps unchanged."""

    base: OracleProblem
    subset: SettingSet

    @property
    def name(self) -> str:
        return f"{self.base.name}|{{{','.join(self.subset.labels())}}}"

    @property
    def sigma(self) -> SettingSet:
        return self.subset

    def as_problem(self) -> OracleProblem:
        return self._flat

    @cached_property
    def _flat(self) -> OracleProblem:
        rows = np.array([self.base.index_of(b) for b in self.subset], dtype=np.int64)
        p = self.base
        return OracleProblem(
            name=self.name,
            setting_width=p.setting_width,
            settings=p.settings[rows],
            arg_width=p.arg_width,
            domain=p.domain,
            answer_width=p.answer_width,
            answers=p.answers[rows],
            solution_width=p.solution_width,
            solutions=p.solutions[rows],
            encoding=p.encoding,
            solution_labels=p.solution_labels,
            notes=p.notes,
        )

    def answer(self, b: int, a: int) -> int:
        if b not in self.subset:
            raise InvalidSubsetError(f"{fmt_bits(b, self.base.setting_width)} not in the reduced set")
        return self.base.answer(b, a)

    def solution(self, b: int) -> int:
        if b not in self.subset:
            raise InvalidSubsetError(f"{fmt_bits(b, self.base.setting_width)} not in the reduced set")
        return self.base.solution(b)


def base_and_subset(problem: OracleProblem | ReducedProblem) -> tuple[OracleProblem, SettingSet]:
    if isinstance(problem, ReducedProblem):
        return problem.base, problem.subset
    return problem, problem.sigma


def as_problem(problem: OracleProblem | ReducedProblem) -> OracleProblem:
    return problem.as_problem() if isinstance(problem, ReducedProblem) else problem


def restrict(problem: OracleProblem, subset: SettingSet | Iterable[int | str]) -> ReducedProblem:
    allowed = None
    if isinstance(problem, ReducedProblem):
        problem, allowed = problem.base, problem.subset
    if not isinstance(subset, SettingSet):
        subset = list(subset)
        if not subset:
            raise InvalidSubsetError("subset must be nonempty")
        subset = SettingSet.of(subset, problem.setting_width)
    if subset.width != problem.setting_width:
        raise InvalidSubsetError("subset width differs from the setting width")
    missing = [b for b in subset if b not in problem._index or (allowed is not None and b not in allowed)]
    if missing:
        shown = ", ".join(fmt_bits(b, subset.width) for b in missing[:4])
        raise InvalidSubsetError(f"not members of sigma: {shown}")
    return ReducedProblem(problem, subset)


def _uint_dtype(width: int):
    for dt in (np.uint8, np.uint16, np.uint32, np.uint64):
        if width <= np.iinfo(dt).bits:
            return dt
    raise SizeLimitError(f"answers of {width} bits are too wide")


def _table_problem(name, arg_width, answer_width, tables, solve, **kw) -> OracleProblem:
    """Build a ``table``-encoded problem from a list of function tables."""
    domain = np.arange(1 << arg_width, dtype=np.int64)
    d = len(domain)
    width = d * answer_width
    if width > 62:
        raise SizeLimitError(f"{name}: table of {width} bits is too wide")
    rows = sorted((sum(v << ((d - 1 - j) * answer_width) for j, v in enumerate(t)), tuple(t)) for t in tables)
    return OracleProblem(
        name=name,
        setting_width=width,
        settings=np.array([b for b, _ in rows], dtype=np.int64),
        arg_width=arg_width,
        domain=domain,
        answer_width=answer_width,
        answers=np.array([t for _, t in rows], dtype=_uint_dtype(answer_width)),
        encoding=TABLE,
        solutions=np.array([solve(t) for _, t in rows], dtype=np.int64),
        **kw,
    )


def make_grover(n: int) -> OracleProblem:
    """Drawers and ball: find b given the Kronecker oracle delta(b, a)."""
    if not 1 <= n <= 12:
        raise SizeLimitError(f"grover: n={n} outside 1..12")
    vals = np.arange(1 << n, dtype=np.int64)
    return OracleProblem(
        name=f"grover-{n}",
        setting_width=n,
        settings=vals,
        arg_width=n,
        domain=vals.copy(),
        answer_width=1,
        answers=np.eye(1 << n, dtype=np.uint8),
        solution_width=n,
        solutions=vals.copy(),
        encoding=COMPACT,
    )


def make_deutsch_jozsa(n: int) -> OracleProblem:
    """Constant-or-balanced promise problem; settings are function tables."""
    if n not in (1, 2, 3):
        raise SizeLimitError(f"deutsch-jozsa: n={n} outside {{1,2,3}}")
    size = 1 << n
    tables = [(0,) * size, (1,) * size]
    for ones in itertools.combinations(range(size), size // 2):
        tables.append(tuple(int(i in ones) for i in range(size)))
    return _table_problem(
        f"deutsch-jozsa-{n}",
        n,
        1,
        tables,
        lambda t: 0 if len(set(t)) == 1 else 1,
        solution_width=1,
        solution_labels={0: "constant", 1: "balanced"},
    )


def make_bernstein_vazirani(n: int) -> OracleProblem:
    """Hidden string b behind the parity oracle a.b mod 2."""
    if not 1 <= n <= 10:
        raise SizeLimitError(f"bernstein-vazirani: n={n} outside 1..10")
    vals = np.arange(1 << n, dtype=np.int64)
    answers = (np.bitwise_count(vals[:, None] & vals[None, :]) & 1).astype(np.uint8)
    return OracleProblem(
        name=f"bernstein-vazirani-{n}",
        setting_width=n,
        settings=vals,
        arg_width=n,
        domain=vals.copy(),
        answer_width=1,
        answers=answers,
        solution_width=n,
        solutions=vals.copy(),
        encoding=COMPACT,
        notes=("exploratory: rule predictions for this family have no reference values",),
    )


SIMON_NOTE = (
    "simon instance family: f maps {0,1}^n to {0,1}^n, two-to-one with a nonzero period p, "
    "distinct values on distinct cosets of {0, p}"
)


def make_simon(n: int) -> OracleProblem:
    """Period finding: f(x) = f(y) iff y = x xor p, p nonzero."""
    if n not in (2, 3):
        raise SizeLimitError(f"simon: n={n} outside {{2,3}}")
    size = 1 << n
    tables = []
    for p in range(1, size):
        reps = [x for x in range(size) if x < x ^ p]
        for values in itertools.permutations(range(size), len(reps)):
            f = [0] * size
            for x, v in zip(reps, values):
                f[x] = f[x ^ p] = v
            tables.append(tuple(f))

    def period(t):
        x = next(y for y in range(1, size) if t[y] == t[0])
        return x

    return _table_problem(
        f"simon-{n}", n, n, tables, period, solution_width=n, notes=(SIMON_NOTE,)
    )


BUILTINS = {
    "grover": make_grover,
    "dj": make_deutsch_jozsa,
    "bv": make_bernstein_vazirani,
    "simon": make_simon,
}

ALIASES = {
    "deutsch-jozsa": "dj",
    "bernstein-vazirani": "bv",
}


def make_builtin(name: str, n: int) -> OracleProblem:
    key = ALIASES.get(name, name)
    if key not in BUILTINS:
        raise KeyError(name)
    return BUILTINS[key](n)


def _require(doc: Mapping, key: str, kind):
    if key not in doc:
        raise ProblemFileError(key, "missing")
    if not isinstance(doc[key], kind):
        raise ProblemFileError(key, f"expected {getattr(kind, '__name__', kind)}")
    return doc[key]


def _uniform_width(strings: Iterable[str], key: str) -> int:
    widths = {len(s) for s in strings}
    if len(widths) != 1:
        raise ProblemFileError(key, "bit strings must share one width")
    return widths.pop()


def problem_from_dict(doc: Mapping) -> OracleProblem:
    """Validate and load a custom problem document.

    Every validation failure raises ``ProblemFileError`` naming the key.
    """
    if not isinstance(doc, Mapping):
        raise ProblemFileError("<root>", "expected a JSON object")
    name = _require(doc, "name", str)
    width = _require(doc, "setting_width", int)
    if width < 1:
        raise ProblemFileError("setting_width", "must be positive")
    raw_settings = _require(doc, "settings", list)
    raw_domain = _require(doc, "domain", list)
    answers_doc = _require(doc, "answers", dict)
    solutions_doc = _require(doc, "solutions", dict)
    encoding = _require(doc, "encoding", str)
    if encoding not in (COMPACT, TABLE):
        raise ProblemFileError("encoding", "must be 'compact' or 'table'")
    if not raw_settings:
        raise ProblemFileError("settings", "must be nonempty")
    if not raw_domain:
        raise ProblemFileError("domain", "must be nonempty")

    def parse_all(items, key, w):
        out = []
        for item in items:
            if not isinstance(item, str):
                raise ProblemFileError(key, f"{item!r} is not a string")
            try:
                out.append(parse_bits(item, w))
            except ValueError as exc:
                raise ProblemFileError(key, str(exc)) from None
        return out

    settings = parse_all(raw_settings, "settings", width)
    if len(set(settings)) != len(settings):
        raise ProblemFileError("settings", "duplicate settings")
    arg_width = _uniform_width(raw_domain, "domain")
    domain = parse_all(raw_domain, "domain", arg_width)
    if len(set(domain)) != len(domain):
        raise ProblemFileError("domain", "duplicate arguments")

    answer_map = {}
    for key, vals in answers_doc.items():
        try:
            answer_map[parse_bits(key, width)] = vals
        except ValueError as exc:
            raise ProblemFileError(f"answers.{key}", str(exc)) from None
    sols = {}
    for key, val in solutions_doc.items():
        if not isinstance(val, str):
            raise ProblemFileError(f"solutions.{key}", "expected a bit string")
        try:
            sols[parse_bits(key, width)] = val
        except ValueError as exc:
            raise ProblemFileError(f"solutions.{key}", str(exc)) from None

    answer_strings = []
    for raw, b in zip(raw_settings, settings):
        row = answer_map.get(b)
        if row is None:
            raise ProblemFileError(f"answers.{raw}", "missing answer row")
        if not isinstance(row, list) or len(row) != len(domain):
            raise ProblemFileError(f"answers.{raw}", f"expected {len(domain)} answers")
        if not all(isinstance(x, str) for x in row):
            raise ProblemFileError(f"answers.{raw}", "answers must be bit strings")
        answer_strings.extend(row)
        if b not in sols:
            raise ProblemFileError(f"solutions.{raw}", "missing solution")
    answer_width = _uniform_width(answer_strings, "answers")
    solution_width = _uniform_width([sols[b] for b in settings], "solutions")

    order = np.argsort(domain, kind="stable")
    rows = {}
    for raw, b in zip(raw_settings, settings):
        try:
            vals = [parse_bits(x, answer_width) for x in answer_map[b]]
        except ValueError as exc:
            raise ProblemFileError(f"answers.{raw}", str(exc)) from None
        if encoding == TABLE:
            concat = 0
            for v in vals:
                concat = (concat << answer_width) | v
            if len(vals) * answer_width != width or concat != b:
                raise ProblemFileError(
                    f"answers.{raw}", "table encoding requires the setting to equal its answer table"
                )
        rows[b] = [vals[j] for j in order]
    try:
        solutions = {b: parse_bits(sols[b], solution_width) for b in settings}
    except ValueError as exc:
        raise ProblemFileError("solutions", str(exc)) from None

    ordered = sorted(settings)
    return OracleProblem(
        name=name,
        setting_width=width,
        settings=np.array(ordered, dtype=np.int64),
        arg_width=arg_width,
        domain=np.array(sorted(domain), dtype=np.int64),
        answer_width=answer_width,
        answers=np.array([rows[b] for b in ordered], dtype=_uint_dtype(answer_width)),
        solution_width=solution_width,
        solutions=np.array([solutions[b] for b in ordered], dtype=np.int64),
        encoding=encoding,
    )


def load_problem_file(path: str | Path) -> OracleProblem:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFileError("<file>", f"invalid JSON: {exc}") from None
    return problem_from_dict(doc)
