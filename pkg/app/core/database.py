from sqlalchemy import create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from .config import settings

# Create the base class
Base = declarative_base()

# SQLite needs the thread check off because sweep workers share the engine
_connect_args = {"check_same_thread": False} if settings.SQLALCHEMY_DATABASE_URL.startswith("sqlite") else {}

# Create engine and session
engine = create_engine(settings.SQLALCHEMY_DATABASE_URL, connect_args=_connect_args)
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()

def init_db():
    # Import models here to avoid circular imports
    from app.models.models import SweepJob
    Base.metadata.create_all(bind=engine)
