from sqlalchemy import Column, Integer, String, DateTime, Enum, Text
from sqlalchemy.sql import func
from app.core.database import Base
import enum

class JobStatus(enum.Enum):
    running = "Running"
    completed = "Complete"
    failed = "Failed"

class MethodId(str, enum.Enum):
    """Comparison schemes; declaration order is the reporting order."""
    pd_with_ris = "pd_with_ris"
    centralized_with_ris = "centralized_with_ris"
    pd_random_ris = "pd_random_ris"
    pd_no_ris = "pd_no_ris"
    zf_no_ris = "zf_no_ris"
    mrt_no_ris = "mrt_no_ris"

class SweepKind(str, enum.Enum):
    power = "power"
    user_location = "user_location"
    ris_elements = "ris_elements"

class SweepJob(Base):
    __tablename__ = "sweep_jobs"

    id = Column(Integer, primary_key=True, index=True)
    job_id = Column(String(100), unique=True, index=True)
    kind = Column(Enum(SweepKind), nullable=False)
    status = Column(Enum(JobStatus), default=JobStatus.running)
    spec_json = Column(Text, nullable=False)
    created_at = Column(DateTime, server_default=func.now())
    completed_at = Column(DateTime, nullable=True)
    url = Column(String(500), nullable=True)

class MseForm(str, enum.Enum):
    """Quadratic part of the per-user MSE consumed by the block updates.

    per_ap          sum over APs of |h~^H f|^2, no cross-AP products; the omega
                    update inverts the per-AP signal energy. Default of the
                    partially distributed schemes.
    per_ap_bounded  per_ap scaled by the number of APs; upper-bounds the coherent
                    quadratic and keeps omega = 1 / mse exact
    coherent        |sum over APs of h~^H f|^2, the exact MSE
    """
    per_ap = "per_ap"
    per_ap_bounded = "per_ap_bounded"
    coherent = "coherent"

class ThetaInit(str, enum.Enum):
    ones = "ones"
    random = "random"
