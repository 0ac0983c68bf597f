from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

CSV_COLUMNS = (
    "config_id",
    "problem",
    "n",
    "k_or_cc",
    "p_m",
    "seed",
    "stream",
    "t_cover",
    "t_opt",
    "t_copt",
    "t_approx",
    "final_best_feasible",
    "final_mst_weight",
    "truncated",
    "wall_ns",
)


@dataclass
class RunRecord:
    """First-hit evaluation counts of one run; None means not reached."""

    config_id: str = ""
    problem: str = ""
    n: int = 0
    k_or_cc: str = ""
    p_m: float = 0.0
    seed: int = 0
    stream: int = 0
    t_cover: Optional[int] = None
    t_opt: Optional[int] = None
    t_copt: Optional[int] = None
    t_approx: Optional[int] = None
    alpha: Optional[float] = None
    final_best_feasible: Optional[float] = None
    final_mst_weight: Optional[float] = None
    truncated: bool = False
    wall_ns: int = 0
    evals: int = 0
    # per-cell first-coverage time and fitness at that moment (0-based cells)
    cell_first_cover: list = field(default_factory=list, repr=False)
    cell_first_fitness: list = field(default_factory=list, repr=False)

    def milestones_ordered(self) -> bool:
        """t_cover <= t_copt and t_opt <= t_copt where both sides exist."""
        if self.t_copt is None:
            return True
        ok = True
        if self.t_cover is not None:
            ok &= self.t_cover <= self.t_copt
        if self.t_opt is not None:
            ok &= self.t_opt <= self.t_copt
        return ok

    def csv_row(self) -> list[str]:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [cell(getattr(self, c)) for c in CSV_COLUMNS]

    @classmethod
    def from_csv_row(cls, row: dict) -> "RunRecord":
        def opt_int(s):
            return int(s) if s not in ("", None) else None

        def opt_float(s):
            return float(s) if s not in ("", None) else None

        return cls(
            config_id=row["config_id"],
            problem=row["problem"],
            n=int(row["n"]),
            k_or_cc=row["k_or_cc"],
            p_m=float(row["p_m"]),
            seed=int(row["seed"]),
            stream=int(row["stream"]),
            t_cover=opt_int(row["t_cover"]),
            t_opt=opt_int(row["t_opt"]),
            t_copt=opt_int(row["t_copt"]),
            t_approx=opt_int(row["t_approx"]),
            final_best_feasible=opt_float(row["final_best_feasible"]),
            final_mst_weight=opt_float(row["final_mst_weight"]),
            truncated=row["truncated"] in ("1", "True", "true"),
            wall_ns=int(row["wall_ns"]),
        )

    def to_json(self, full: bool = False) -> str:
        d = asdict(self)
        if not full:
            d.pop("cell_first_cover")
            d.pop("cell_first_fitness")
        return json.dumps(d, indent=2)
