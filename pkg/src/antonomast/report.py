"""Result serialization (text / JSON / TSV) and the method-comparison sheet."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

from .errors import AntonomastError
from .pipeline import GenerationRun, VaResult

RESULT_COLUMNS = ("rank", "sentence", "method", "similarity", "l1", "source_id", "target_id", "modifier_id")
RATING_SUFFIX = "rating_1_to_5"


def _num(x: float) -> str:
    return f"{x:.6f}"


def results_text(results: Iterable[VaResult]) -> str:
    return "".join(f"{r.sentence}\n" for r in results)


def results_tsv(results: Iterable[VaResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        w.writerow(
            [r.rank, r.sentence, r.method.value, _num(r.similarity), _num(r.l1), r.source.id, r.target.id, r.modifier_id]
        )
    return buf.getvalue()


def results_json(run: GenerationRun) -> str:
    return json.dumps(run.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def format_run(run: GenerationRun, fmt: str) -> str:
    if fmt == "text":
        return results_text(run.results)
    if fmt == "tsv":
        return results_tsv(run.results)
    if fmt == "json":
        return results_json(run)
    raise ValueError(f"unknown format {fmt!r}")


# -- comparison ------------------------------------------------------------------


@dataclass
class Cell:
    text: str
    similarity: float | None = None
    failed: bool = False


Runner = Callable[[str, str], Cell]


def error_cell(exc: BaseException) -> Cell:
    return Cell(f"ERROR:{type(exc).__name__}", failed=True)


def compare_targets(targets: Sequence[str], methods: Sequence[str], runner: Runner) -> list[dict[str, Cell]]:
    """One row per target, one cell per method; failures become ``ERROR:<reason>`` cells."""
    rows = []
    for target in targets:
        row: dict[str, Cell] = {}
        for method in methods:
            try:
                row[method] = runner(target, method)
            except AntonomastError as exc:
                row[method] = error_cell(exc)
        rows.append(row)
    return rows


def comparison_tsv(targets: Sequence[str], methods: Sequence[str], rows: Sequence[dict[str, Cell]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["target", *methods, *(f"{m}_{RATING_SUFFIX}" for m in methods)])
    for target, row in zip(targets, rows):
        w.writerow([target, *(row[m].text for m in methods), *("" for _ in methods)])
    return buf.getvalue()


def all_failed(rows: Sequence[dict[str, Cell]]) -> bool:
    cells = [c for row in rows for c in row.values()]
    return bool(cells) and all(c.failed for c in cells)


def read_targets(path) -> list[str]:
    """Targets file: one label or id per line; blank lines and ``#`` comments ignored."""
    with open(path, encoding="utf-8") as fh:
        return [s for line in fh if (s := line.strip()) and not s.startswith("#")]
