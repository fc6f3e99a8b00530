from fastapi import APIRouter, Depends, HTTPException, Query
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field, ValidationError
from sqlalchemy.orm import Session
from typing import Any, Dict, List, Optional
import uuid
import logging
import os
from app.core import get_db
from app.models import JobStatus, MethodId, SweepJob, SweepKind, SweepSpec
from app.models.scenario import DEFAULT_SWEEP_VALUES, ScenarioConfig
from app.utils.report import overhead_rows
from celery_app import celery_app

router = APIRouter()
logger = logging.getLogger(__name__)


class SweepRequest(BaseModel):
    kind: SweepKind
    values: Optional[List[float]] = None
    methods: Optional[List[MethodId]] = None
    num_seeds: int = Field(50, ge=1)
    seed_offset: int = Field(0, ge=0)
    scenario: Dict[str, Any] = Field(default_factory=dict)

    def to_spec(self) -> SweepSpec:
        payload: Dict[str, Any] = {
            "kind": self.kind,
            "values": self.values or DEFAULT_SWEEP_VALUES[self.kind],
            "num_seeds": self.num_seeds,
            "seed_offset": self.seed_offset,
            "base_config": self.scenario,
        }
        if self.methods:
            payload["methods"] = self.methods
        return SweepSpec.model_validate(payload)


@router.post("/trigger_sweep")
async def trigger_sweep(request: SweepRequest, db: Session = Depends(get_db)):
    try:
        spec = request.to_spec()
    except ValidationError as e:
        raise HTTPException(status_code=422, detail=str(e))

    job = None
    try:
        # Adding new SweepJob instance in db
        job_id = str(uuid.uuid4())
        job = SweepJob(job_id=job_id, kind=spec.kind, status=JobStatus.running, spec_json=spec.model_dump_json())
        db.add(job)
        db.commit()
        db.refresh(job)

        # The worker reloads the sweep from the job row
        celery_app.send_task('sweep_generation', args=[job_id])

        return {
            "job_id": job_id
        }
    except Exception as e:
        logger.error(f"Error triggering sweep: {str(e)}")
        if job is not None:
            job.status = JobStatus.failed
            db.commit()
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/get_sweep/{job_id}")
async def get_sweep(job_id: str, db: Session = Depends(get_db)):
    try:
        job = db.query(SweepJob).filter(SweepJob.job_id == job_id).first()
        if not job:
            raise HTTPException(status_code=404, detail="Sweep job not found")

        if job.status == JobStatus.running:
            return {"status": "Running"}
        elif job.status == JobStatus.completed:
            file_path = job.url
            if not file_path or not os.path.exists(file_path):
                raise HTTPException(status_code=404, detail="Sweep file not found")

            return {
                "status": "Complete",
                "file_path": file_path
            }
        elif job.status == JobStatus.failed:
            return {"status": "Failed"}
        else:
            raise HTTPException(status_code=500, detail="Unknown error")

    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error retrieving sweep job: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/download_sweep")
async def download_sweep(file_path: str):
    try:
        if not file_path or not os.path.exists(file_path):
            raise HTTPException(status_code=404, detail="Sweep file not found")

        return FileResponse(
            path=file_path,
            filename=os.path.basename(file_path),
            media_type='text/csv'
        )
    except HTTPException:
        raise
    except Exception as e:
        logger.error(f"Error downloading sweep: {str(e)}")
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/overhead")
async def overhead(iterations: List[int] = Query([10])):
    config = ScenarioConfig()
    return {
        "dimensions": {
            "B": config.num_aps,
            "Nt": config.antennas_per_ap,
            "K": config.num_users,
            "M": config.ris_elements,
        },
        "rows": overhead_rows(config.num_aps, config.antennas_per_ap, config.num_users, config.ris_elements, iterations),
    }
