import functools
import logging
import time

import numpy as np


VALID_TRACE_FLAGS = {"method", "api"}
TRACE_ENABLED = False
LOG = logging.getLogger("CRLKIT")


def _summarize(value):
    """Arrays are logged by shape, the values would flood the log."""
    if isinstance(value, np.ndarray):
        return f"ndarray{value.shape}"
    if isinstance(value, (list, tuple)) and len(value) > 8:
        return f"{type(value).__name__}[{len(value)}]"
    return value


def trace(*dec_args, **dec_kwargs):
    """Trace calls to the decorated function.

    This decorator should always be defined as the outermost decorator so it
    is defined last. This is important so it does not interfere
    with other decorators.

    Using this decorator on a function will cause its execution to be logged at
    `DEBUG` level with argument summaries, the elapsed time and exceptions.

    :returns: a function decorator
    """

    def _decorator(f):

        func_name = f.__qualname__

        @functools.wraps(f)
        def trace_logging_wrapper(*args, **kwargs):
            if not TRACE_ENABLED or not LOG.isEnabledFor(logging.DEBUG):
                return f(*args, **kwargs)

            LOG.debug(
                "==> %(func)s: call args=%(args)r kwargs=%(kwargs)r",
                {
                    "func": func_name,
                    "args": [_summarize(a) for a in args[1:]],
                    "kwargs": {k: _summarize(v) for k, v in kwargs.items()},
                },
            )
            start_time = time.perf_counter()
            try:
                result = f(*args, **kwargs)
            except Exception as exc:
                LOG.debug(
                    "<== %(func)s: exception (%(time).1fms) %(exc)r",
                    {
                        "func": func_name,
                        "time": (time.perf_counter() - start_time) * 1000,
                        "exc": exc,
                    },
                )
                raise
            LOG.debug(
                "<== %(func)s: return (%(time).1fms) %(result)r",
                {
                    "func": func_name,
                    "time": (time.perf_counter() - start_time) * 1000,
                    "result": _summarize(result),
                },
            )
            return result

        return trace_logging_wrapper

    if len(dec_args) == 0:
        return _decorator
    else:
        return _decorator(dec_args[0])


def setup_tracing(trace_flags):
    """Turn tracing on.

    :param trace_flags: a list of strings
    """
    global TRACE_ENABLED

    try:
        trace_flags = [flag.strip() for flag in trace_flags]
    except TypeError:  # Handle when trace_flags is None or a test mock
        trace_flags = []
    for invalid_flag in set(trace_flags) - VALID_TRACE_FLAGS:
        LOG.warning("Invalid trace flag: %s", invalid_flag)
    TRACE_ENABLED = bool(trace_flags)
