"""End-to-end computation of an exact Belyi function from a dessin.

Stages run in order: fundamental domain, truncated Hauptmodul series,
Newton refinement, algebraic recognition, exact identity check. Numeric
intermediates (the series and the refined solution) are cached on disk
under a hash of the dessin and of the configuration fields each stage
depends on, so changing e.g. the recognition degree leaves the series
cache valid.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import gmpy2

from .dessin import Dessin, DessinError, genus, is_23_type, is_weighted_tree, passport
from .domain import coset_domain
from .linalg import SingularMatrixError
from .newton import (IterationRecord, NewtonError, NumericAnsatz, iteration_log_text, newton_solve,
                     parse_iteration_log, seed)
from .numfield import format_complex, parse_complex
from .recognition import RecognitionError, RecognitionReport, exactify
from .series import SeriesError, bits, series_from_text, series_schedule, series_to_text, vertex_estimates
from .verify import CatalogEntry, VerificationError, identity_check, symbolic_passport

log = logging.getLogger(__name__)

CACHE_ENV = "BELYI_CACHE_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_RECOGNITION = 3
EXIT_VERIFICATION = 4


class StageError(RuntimeError):
    """A stage failure, tagged with the stage name and an exit code."""

    def __init__(self, stage: str, message: str, exit_code: int):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.exit_code = exit_code


@dataclass(frozen=True)
class PipelineConfig:
    seed_digits: int = 60
    target_digits: int = 240
    series_points_per_arc: int = 3
    series_N_start: int | None = None  # None means 4n
    max_field_degree: int = 8
    lll_delta: float = 0.99
    cache_dir: Path | None = None
    deterministic: bool = True
    random_seed: int = 0

    def __post_init__(self):
        if self.target_digits < 2 * self.seed_digits:
            raise ValueError(f"target_digits ({self.target_digits}) must be at least twice "
                             f"seed_digits ({self.seed_digits})")
        if self.max_field_degree < 1:
            raise ValueError("max_field_degree must be at least 1")
        if not 0.25 < self.lll_delta < 1:
            raise ValueError("lll_delta must lie in (1/4, 1)")
        if self.series_points_per_arc < 1:
            raise ValueError("series_points_per_arc must be positive")

    @property
    def delta(self) -> Fraction:
        return Fraction(self.lll_delta).limit_denominator(1000)

    def stage_fields(self, stage: str) -> dict:
        """Configuration fields a stage (and everything upstream of it) depends on."""
        series = {"seed_digits": self.seed_digits,
                  "series_points_per_arc": self.series_points_per_arc,
                  "series_N_start": self.series_N_start}
        if stage == "series":
            return series
        newton = dict(series, target_digits=self.target_digits)
        if stage == "newton":
            return newton
        return dict(newton, max_field_degree=self.max_field_degree, lll_delta=self.lll_delta)

    def config_hash(self, stage: str = "recognition") -> str:
        text = json.dumps(self.stage_fields(stage), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def resolved_cache_dir(self) -> Path | None:
        env = os.environ.get(CACHE_ENV)
        if env:
            return Path(env)
        return Path(self.cache_dir) if self.cache_dir is not None else None


class Cache:
    """Stage artifacts keyed by dessin and configuration hash; writes are atomic."""

    def __init__(self, root: Path | None):
        self.root = root

    def _path(self, dessin_key: str, stage: str, config_hash: str) -> Path | None:
        if self.root is None:
            return None
        return self.root / dessin_key / f"{stage}-{config_hash}.txt"

    def get(self, dessin_key: str, stage: str, config_hash: str) -> str | None:
        path = self._path(dessin_key, stage, config_hash)
        if path is None or not path.exists():
            return None
        return path.read_text()

    def put(self, dessin_key: str, stage: str, config_hash: str, text: str) -> None:
        path = self._path(dessin_key, stage, config_hash)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)


def dessin_key(d: Dessin) -> str:
    # the labeling matters: it fixes the root edge and hence the domain
    return hashlib.sha256(f"{d.a}|{d.b}|{d.n}".encode()).hexdigest()[:16]


@dataclass
class PipelineResult:
    entry: CatalogEntry
    report: RecognitionReport
    records: list[IterationRecord] = field(default_factory=list)
    series_history: list = field(default_factory=list)

    def files(self) -> dict[str, str]:
        """The result bundle: file name -> contents."""
        return {"belyi.txt": self.entry.to_text(),
                "recognition.txt": self.report.to_text(),
                "iterations.txt": iteration_log_text(self.records)}

    def write(self, directory) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        out = []
        for name, text in self.files().items():
            path = directory / name
            path.write_text(text)
            out.append(path)
        return out


def _solution_to_text(x: NumericAnsatz) -> str:
    vec = x.vector()
    prec = max(v.precision[0] for v in vec)
    lines = [f"digits={x.digits} bits={prec}"]
    lines += [format_complex(v) for v in vec]
    return "\n".join(lines) + "\n"


def _solution_from_text(template: NumericAnsatz, text: str) -> NumericAnsatz:
    lines = text.strip().splitlines()
    head = dict(tok.split("=") for tok in lines[0].split())
    digits = int(head["digits"])
    with gmpy2.context(precision=int(head["bits"])):
        vec = [parse_complex(ln) for ln in lines[1:]]
    if len(vec) != template.layout.n:
        raise ValueError("cached solution does not fit the layout")
    return template.with_vector(vec, digits)


def check_input(d: Dessin) -> None:
    if genus(d) != 0:
        raise DessinError(f"the dessin has genus {genus(d)}, not 0")
    if not is_23_type(d):
        raise DessinError("the dessin is not of (2,3)-type: black vertices need degree 1 or 3, "
                          "white vertices degree 1 or 2")
    if not is_weighted_tree(d):
        raise DessinError("the dessin is not a weighted tree: all faces but one must have degree 1")


def compute(d: Dessin, config: PipelineConfig = PipelineConfig(), label: str | None = None) -> PipelineResult:
    """Run all stages on ``d``; raises :class:`StageError` on failure."""
    check_input(d)
    p = passport(d)
    cache = Cache(config.resolved_cache_dir())
    key = dessin_key(d)
    dom = coset_domain(d)

    # series
    h_series = config.config_hash("series")
    history = []
    try:
        cached = cache.get(key, "series", h_series)
        if cached is not None:
            _, s = series_from_text(cached)
            est = vertex_estimates(dom, s, p)
            log.info("series loaded from cache (N=%d)", s.N)
        else:
            s, est, history = series_schedule(dom, p, config.series_N_start,
                                              digits=config.seed_digits,
                                              k_min=config.series_points_per_arc)
            cache.put(key, "series", h_series, series_to_text(s, d.n))
            log.info("series N=%d, spread history %s", s.N, history)
        x0 = seed(est, p, config.seed_digits)
    except (SeriesError, NewtonError, SingularMatrixError) as exc:
        raise StageError("series", str(exc), EXIT_NUMERIC) from exc

    # newton
    h_newton = config.config_hash("newton")
    try:
        cached = cache.get(key, "newton", h_newton)
        if cached is not None:
            body, _, log_text = cached.partition("--\n")
            x = _solution_from_text(x0, body)
            records = parse_iteration_log(log_text)
            log.info("refined solution loaded from cache")
        else:
            records = []
            x = newton_solve(x0, config.target_digits, log_records=records)
            cache.put(key, "newton", h_newton, _solution_to_text(x) + "--\n" + iteration_log_text(records))
            log.info("newton converged in %d steps", len(records))
    except (NewtonError, SingularMatrixError) as exc:
        raise StageError("newton", str(exc), EXIT_NUMERIC) from exc

    # recognition
    try:
        ans, report = exactify(x, config.max_field_degree, delta=config.delta)
    except RecognitionError as exc:
        raise StageError("recognition", str(exc), EXIT_RECOGNITION) from exc

    # verification
    res = identity_check(ans)
    if not res:
        raise StageError("verify", res.message, EXIT_VERIFICATION)
    try:
        sp = symbolic_passport(ans)
    except VerificationError as exc:
        raise StageError("verify", str(exc), EXIT_VERIFICATION) from exc
    if sp != p:
        raise StageError("verify", f"exact passport {sp} differs from the dessin's {p}",
                         EXIT_VERIFICATION)
    entry = CatalogEntry(label or d.label or "unlabeled", p, ans)
    return PipelineResult(entry, report, records, history)


def config_summary(config: PipelineConfig) -> str:
    data = asdict(config)
    data["cache_dir"] = str(config.resolved_cache_dir())
    return " ".join(f"{k}={v}" for k, v in data.items())


__all__ = ["PipelineConfig", "PipelineResult", "StageError", "Cache", "compute", "check_input",
           "dessin_key", "CACHE_ENV", "EXIT_OK", "EXIT_USAGE", "EXIT_NUMERIC",
           "EXIT_RECOGNITION", "EXIT_VERIFICATION"]
