"""Run report produced by every attack: query accounting, loss trace,
metrics, and enough provenance (seed, config echo) to reproduce the run."""

from __future__ import annotations

from dataclasses import dataclass, field

REPORT_VERSION = 1


@dataclass
class AttackReport:
    method: str
    config: dict
    seed: int | None
    query_count: int
    loss_trace: list = field(default_factory=list)  # [(query index, loss)]
    final_loss: float | None = None
    clean_metrics: dict = field(default_factory=dict)
    adv_metrics: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    def to_dict(self):
        return {
            "report_version": REPORT_VERSION,
            "method": self.method,
            "config": self.config,
            "seed": self.seed,
            "query_count": self.query_count,
            "loss_trace": [[int(q), float(v)] for q, v in self.loss_trace],
            "final_loss": self.final_loss,
            "clean_metrics": self.clean_metrics,
            "adv_metrics": self.adv_metrics,
            "wall_time_s": self.wall_time_s,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            method=d["method"],
            config=d["config"],
            seed=d["seed"],
            query_count=d["query_count"],
            loss_trace=[(int(q), float(v)) for q, v in d["loss_trace"]],
            final_loss=d["final_loss"],
            clean_metrics=d["clean_metrics"],
            adv_metrics=d["adv_metrics"],
            wall_time_s=d["wall_time_s"],
        )
