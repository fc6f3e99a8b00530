from app.core.database import init_db
from app.models import models  # registers SweepJob on the metadata
import logging

logger = logging.getLogger(__name__)

def main():
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    logger.info("Creating sweep job tables...")
    init_db()
    logger.info("Sweep job tables created successfully!")

if __name__ == "__main__":
    main()
