"""
Database models for the nmfbench results store.

A BenchmarkRun row describes one executed grid; its RecordRows hold every
traced iteration in canonical order.
"""

import json
from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import relationship

from nmfbench.database import Base


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class BenchmarkRun(Base):
    """
    One executed benchmark grid.

    Attributes:
        id: Primary key
        data_ref: Dataset reference the run was given
        dataset: Resolved dataset name
        rank: Rank the grid ran at
        solver: Solver kind
        inits: Comma-separated initializer names
        seeds: Replicates per randomized initializer
        master_seed: Seed all cell seeds derive from
        max_iter: Solver iteration cap
        tol: Solver stopping tolerance
        record_count: Number of stored records
        failures_json: JSON list of failed cells
        created_at: Time the run was stored
        records: Relationship to the traced iterations
    """
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    data_ref = Column(String, nullable=False)
    dataset = Column(String, nullable=False)
    rank = Column(Integer, nullable=False)
    solver = Column(String, nullable=False)
    inits = Column(String, nullable=False)
    seeds = Column(Integer, nullable=False)
    master_seed = Column(Integer, nullable=False)
    max_iter = Column(Integer, nullable=False)
    tol = Column(Float, nullable=False)
    record_count = Column(Integer, default=0)
    failures_json = Column(Text, default="[]")
    created_at = Column(DateTime, default=_utcnow)

    # Relationship: one run has many records, deleted along with it
    records = relationship("RecordRow", back_populates="run", cascade="all, delete-orphan",
                           order_by="RecordRow.position")

    @property
    def failures(self) -> list:
        return json.loads(self.failures_json or "[]")

    @classmethod
    def from_result(cls, spec, result) -> "BenchmarkRun":
        """Build a run row, with its records, from a RunSpec and BenchmarkResult."""
        run = cls(
            data_ref=spec.data,
            dataset=result.dataset,
            rank=result.rank,
            solver=spec.solver.kind,
            inits=",".join(spec.inits),
            seeds=spec.seeds,
            master_seed=spec.master_seed,
            max_iter=spec.solver.max_iter,
            tol=spec.solver.tol,
            record_count=len(result.records),
            failures_json=json.dumps([f.model_dump() for f in result.failures]),
        )
        run.records = [
            RecordRow(position=i, **record.model_dump())
            for i, record in enumerate(result.records)
        ]
        return run


class RecordRow(Base):
    """
    One traced iteration of one grid cell.

    Attributes:
        id: Primary key
        run_id: Foreign key to the run
        position: Index in the run's canonical record order
    """
    __tablename__ = "records"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("runs.id"), nullable=False, index=True)
    position = Column(Integer, nullable=False)
    dataset = Column(String, nullable=False)
    init = Column(String, nullable=False)
    solver = Column(String, nullable=False)
    seed = Column(String, nullable=False)
    iteration = Column(Integer, nullable=False)
    objective = Column(Float, nullable=False)
    rel_error = Column(Float, nullable=False)
    elapsed_ms = Column(Float, default=0.0)
    stop_reason = Column(String, default="")

    run = relationship("BenchmarkRun", back_populates="records")
