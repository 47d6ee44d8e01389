"""Run independent jobs in order, optionally on a process pool.

Results come back in submission order whatever the worker count, so output
never depends on scheduling.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor

logger = logging.getLogger(__name__)


def _init_worker():
    import django

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'minorbench.settings')
    django.setup()


def run_jobs(fn, arguments, jobs=1):
    arguments = list(arguments)
    if jobs <= 1 or len(arguments) <= 1:
        return [fn(*args) for args in arguments]
    logger.info(f"Running {len(arguments)} jobs on {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as pool:
        return list(pool.map(fn, *zip(*arguments)))
