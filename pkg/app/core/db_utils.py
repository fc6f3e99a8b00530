from contextlib import contextmanager
from datetime import datetime
from typing import Optional
from sqlalchemy.orm import Session
from .database import SessionLocal

@contextmanager
def get_db_session():
    """Transactional scope: commit on success, roll back on any exception."""
    session: Session = SessionLocal()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def mark_job(session: Session, job, status, url: Optional[str] = None):
    """Move a sweep job to a terminal or running status and persist it."""
    job.status = status
    if url is not None:
        job.url = url
    if status.value != "Running":
        job.completed_at = datetime.now()
    session.commit()
    session.refresh(job)
    return job
