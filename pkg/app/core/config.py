from pydantic_settings import BaseSettings
from dotenv import load_dotenv
from typing import Optional
import os


load_dotenv()

class Settings(BaseSettings):

    # Optional full override, e.g. sqlite:////tmp/sweeps.db
    DATABASE_URL: Optional[str] = os.getenv("DATABASE_URL")

    MYSQL_USER: Optional[str] = os.getenv("MYSQL_USER")
    MYSQL_PASSWORD: Optional[str] = os.getenv("MYSQL_PASSWORD")
    MYSQL_HOST: Optional[str] = os.getenv("MYSQL_HOST")
    MYSQL_PORT: Optional[str] = os.getenv("MYSQL_PORT", "3306")
    MYSQL_DB: Optional[str] = os.getenv("MYSQL_DB")

    # Redis
    REDIS_URL: str = os.getenv("REDIS_URL", "redis://localhost:6379/0")

    # Sweep outputs and worker pool
    REPORTS_DIR: str = os.getenv("REPORTS_DIR", "reports")
    SWEEP_WORKERS: int = int(os.getenv("SWEEP_WORKERS", "4"))

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    @property
    def SQLALCHEMY_DATABASE_URL(self):
        if self.DATABASE_URL:
            return self.DATABASE_URL
        if self.MYSQL_HOST:
            return f"mysql://{self.MYSQL_USER}:{self.MYSQL_PASSWORD}@{self.MYSQL_HOST}:{self.MYSQL_PORT}/{self.MYSQL_DB}"
        return "sqlite:///./ris_cellfree.db"


    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "allow"

settings = Settings()
