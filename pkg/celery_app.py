from celery import Celery
from app.core.config import settings

celery_app = Celery(
    'ris_cellfree',
    broker=settings.REDIS_URL,
    backend=settings.REDIS_URL,
    include=['app.services.sweep_service']
)

# A sweep task owns SWEEP_WORKERS threads, so one task per worker process
celery_app.conf.update(
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',
    task_routes={'sweep_generation': {'queue': 'sweeps'}},
    task_default_queue='sweeps',
    task_track_started=True,
    task_acks_late=True,
    task_soft_time_limit=6 * 3600,
    task_time_limit=6 * 3600 + 300,
    worker_prefetch_multiplier=1,
    worker_concurrency=1,
    worker_max_tasks_per_child=1,
    result_expires=7 * 24 * 3600,
    broker_connection_retry_on_startup=True,
    worker_pool='solo',
)
