from typing import Optional
import json
import logging
import os

from app.core.config import settings
from app.core.db_utils import get_db_session, mark_job
from app.models import JobStatus, SweepJob, SweepSpec
from app.services.experiments import sweep
from app.utils.report import emit_csv
from celery_app import celery_app

logger = logging.getLogger(__name__)


def sweep_file_path(job_id: str, aggregate: bool = False) -> str:
    suffix = "_aggregate" if aggregate else ""
    return os.path.join(settings.REPORTS_DIR, f"sweep_{job_id}{suffix}.csv")


def run_sweep_job(job_id: str, workers: Optional[int] = None) -> str:
    """Run the sweep stored on a job row and write its CSVs; returns the raw-rows path."""
    with get_db_session() as db:
        job = db.query(SweepJob).filter(SweepJob.job_id == job_id).first()
        if not job:
            raise LookupError(f"Sweep job with ID {job_id} not found")

        logger.info(f"Starting sweep generation for job_id: {job_id}")
        try:
            spec = SweepSpec.model_validate(json.loads(job.spec_json))
            result = sweep(spec, workers=workers)
            file_path = emit_csv(result, sweep_file_path(job_id))
            emit_csv(result, sweep_file_path(job_id, aggregate=True), aggregate=True)
        except Exception as e:
            logger.error(f"Error generating sweep {job_id}: {str(e)}")
            mark_job(db, job, JobStatus.failed)
            raise

        mark_job(db, job, JobStatus.completed, url=file_path)
        logger.info(f"Sweep {job_id} complete: {file_path}")
        return file_path


@celery_app.task(name='sweep_generation')
def sweep_generation(job_id: str):
    return run_sweep_job(job_id)
