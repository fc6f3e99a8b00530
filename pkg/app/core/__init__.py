from .config import settings
from .database import Base, get_db, init_db
from .db_utils import get_db_session, mark_job
from .exceptions import (
    RisCellFreeError,
    ConfigurationError,
    DegenerateGeometryError,
    DimensionMismatchError,
    DegenerateChannelError,
    SolverError,
    InvariantViolationError,
)

__all__ = [
    'settings',
    'Base',
    'get_db',
    'init_db',
    'get_db_session',
    'mark_job',
    'RisCellFreeError',
    'ConfigurationError',
    'DegenerateGeometryError',
    'DimensionMismatchError',
    'DegenerateChannelError',
    'SolverError',
    'InvariantViolationError',
]
