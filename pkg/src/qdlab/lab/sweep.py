"""Replicated runs over an n-grid, streamed to CSV in (grid_index, rep) order."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Iterator, Optional

from ..bitcore import RandomSource
from ..engines import qd_run
from ..features import ConfigurationError
from ..records import CSV_COLUMNS, RunRecord
from .config import GridPoint, SweepConfig, build_point

log = logging.getLogger(__name__)


def run_point(point: GridPoint, seed: int, stream: int, config_id: str = "", timing: bool = True) -> RunRecord:
    rec = qd_run(point.problem, point.space, point.p_m, point.stop, RandomSource(seed, stream), config_id=config_id)
    if not timing:
        rec.wall_ns = 0
    return rec


def _task(args) -> RunRecord:
    point, seed, stream, config_id, timing = args
    return run_point(point, seed, stream, config_id, timing)


def iter_sweep(cfg: SweepConfig) -> Iterator[RunRecord]:
    """Yield records in (grid_index, rep) order regardless of completion order."""
    points = [build_point(cfg, n, gi) for gi, n in enumerate(cfg.grid)]
    tasks = [
        (points[gi], cfg.master_seed, cfg.stream(gi, rep), cfg.config_id, cfg.timing)
        for gi in range(len(cfg.grid))
        for rep in range(cfg.replications)
    ]
    workers = cfg.workers if cfg.workers > 0 else (os.cpu_count() or 1)
    if workers == 1:
        for t in tasks:
            yield _task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_task, tasks, chunksize=1)


def write_header(fh) -> csv.writer:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    return w


def run_sweep(cfg: SweepConfig, output: Optional[str] = None) -> list[RunRecord]:
    """Run every (grid point, replication); append rows to ``output`` as they finish."""
    out = output or cfg.output
    records = []
    fh = None
    if out is not None:
        path = Path(out)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fh = path.open("w", newline="")
        except OSError as exc:
            raise ConfigurationError(f"cannot write sweep output {out}: {exc}") from exc
    try:
        writer = write_header(fh) if fh else None
        for rec in iter_sweep(cfg):
            records.append(rec)
            if writer:
                writer.writerow(rec.csv_row())
                fh.flush()
            log.debug("n=%d stream=%d t_cover=%s", rec.n, rec.stream, rec.t_cover)
    finally:
        if fh:
            fh.close()
    return records


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    w = write_header(buf)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def read_csv(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigurationError(f"{path}: columns do not match the sweep schema")
        return [RunRecord.from_csv_row(row) for row in reader]
