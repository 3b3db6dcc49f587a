# Make these available to anyone importing
# crlkit.threads
from .base import CRLThread, CRLThreadList  # noqa: F401
from .worker import Job, JobResult, JobRunner, JobWorkerThread  # noqa: F401
