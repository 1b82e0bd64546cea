import logging
import uuid
from contextvars import ContextVar

_run_id: ContextVar[str] = ContextVar("run_id", default="-")


def new_run_id() -> str:
    run_id = uuid.uuid4().hex[:8]
    _run_id.set(run_id)
    return run_id


class RunIdFilter(logging.Filter):
    def filter(self, record):
        record.run_id = _run_id.get()
        return True


class SafeRunIdFormatter(logging.Formatter):
    def format(self, record):
        if not hasattr(record, "run_id"):
            record.run_id = "-"
        return super().format(record)


def setup_logging(level: str = "INFO"):
    formatter = SafeRunIdFormatter('%(asctime)s - %(levelname)s - [%(run_id)s] - %(name)s - %(message)s')
    handler = logging.StreamHandler()          # stderr; stdout carries JSON only
    handler.setFormatter(formatter)
    handler.addFilter(RunIdFilter())
    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        root_logger.handlers.clear()
    root_logger.addHandler(handler)
    root_logger.setLevel(level.upper())
