"""
Benchmark run router for nmfbench.

This module runs benchmark grids on request and serves stored runs: their
records, seed-averaged summaries and error-curve plots.
"""

import logging
from typing import List

from fastapi import APIRouter, Depends, HTTPException, Response
from sqlalchemy.orm import Session

from nmfbench import database, models, schemas
from nmfbench.bench import run_benchmark, summarize
from nmfbench.errors import NmfError
from nmfbench.output import render_svg_plot

logger = logging.getLogger(__name__)

router = APIRouter()

get_db = database.get_db


def _get_run(run_id: int, db: Session) -> models.BenchmarkRun:
    run = db.query(models.BenchmarkRun).filter(models.BenchmarkRun.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run


def _records(run: models.BenchmarkRun) -> List[schemas.RunRecord]:
    return [schemas.RunRecord.model_validate(row) for row in run.records]


@router.post("/", response_model=schemas.RunOut)
def create_run(spec: schemas.RunSpec, db: Session = Depends(get_db)):
    """
    Execute a benchmark grid and store it.

    The grid runs synchronously; failed cells are reported in the stored run.

    Args:
        spec: Run specification
        db: Database session dependency

    Returns:
        RunOut: The stored run

    Raises:
        HTTPException: 400 if the dataset cannot be loaded or the rank is invalid
    """
    try:
        result = run_benchmark(spec)
    except (NmfError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))

    run = models.BenchmarkRun.from_result(spec, result)
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info("Stored run %d with %d records", run.id, run.record_count)
    return run


@router.get("/", response_model=List[schemas.RunOut])
def list_runs(skip: int = 0, limit: int = 100, db: Session = Depends(get_db)):
    """
    Retrieve stored runs, newest last.

    Args:
        skip: Runs to skip
        limit: Maximum number of runs returned
        db: Database session dependency
    """
    return db.query(models.BenchmarkRun).order_by(models.BenchmarkRun.id).offset(skip).limit(limit).all()


@router.get("/{run_id}", response_model=schemas.RunOut)
def get_run(run_id: int, db: Session = Depends(get_db)):
    """
    Retrieve a stored run by ID.

    Raises:
        HTTPException: If the run is not found
    """
    return _get_run(run_id, db)


@router.get("/{run_id}/records", response_model=List[schemas.RunRecord])
def get_run_records(run_id: int, skip: int = 0, limit: int = 1000, db: Session = Depends(get_db)):
    """
    Retrieve the records of a stored run in canonical order.

    Raises:
        HTTPException: If the run is not found
    """
    _get_run(run_id, db)
    return (
        db.query(models.RecordRow)
        .filter(models.RecordRow.run_id == run_id)
        .order_by(models.RecordRow.position)
        .offset(skip)
        .limit(limit)
        .all()
    )


@router.get("/{run_id}/summary", response_model=List[schemas.RunRecord])
def get_run_summary(run_id: int, db: Session = Depends(get_db)):
    """
    Seed-averaged records of a stored run, one per (init, iteration).

    Raises:
        HTTPException: If the run is not found
    """
    return summarize(_records(_get_run(run_id, db)))


@router.get("/{run_id}/plot.svg")
def get_run_plot(run_id: int, log_y: bool = True, db: Session = Depends(get_db)):
    """
    Relative error against iteration for a stored run, as SVG.

    Raises:
        HTTPException: If the run is not found
    """
    run = _get_run(run_id, db)
    svg = render_svg_plot(_records(run), log_y=log_y, title=run.dataset)
    return Response(content=svg, media_type="image/svg+xml")


@router.delete("/{run_id}")
def delete_run(run_id: int, db: Session = Depends(get_db)):
    """
    Delete a stored run and its records.

    Returns:
        dict: Success message

    Raises:
        HTTPException: If the run is not found
    """
    run = _get_run(run_id, db)
    db.delete(run)
    db.commit()
    return {"message": "Run deleted successfully"}
