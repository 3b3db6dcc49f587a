import os
import tempfile
import unittest

from loguru import logger
from oslo_config import cfg

from crlkit import conf  # noqa: F401
from crlkit.log import log


CONF = cfg.CONF


class TestQueueLatest(unittest.TestCase):

    def test_keeps_newest(self):
        q = log.QueueLatest(maxsize=3)
        for i in range(5):
            q.put(f"line {i}")
        self.assertEqual(["line 2", "line 3", "line 4"], q.latest())

    def test_sink_strips_newline(self):
        saved = log.logging_queue
        log.logging_queue = log.QueueLatest(maxsize=2)
        try:
            log._queue_sink("hello\n")
            self.assertEqual(["hello"], log.logging_queue.latest())
        finally:
            log.logging_queue = saved


class TestResultsLog(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = os.path.join(self.tmp.name, "run")

    def tearDown(self):
        CONF.clear_override("results_logfile", group="logging")
        self.tmp.cleanup()

    def test_writes_only_inside_block(self):
        with log.results_log(self.root) as path:
            logger.warning("inside the run")
        logger.warning("after the run")
        self.assertEqual(os.path.join(self.root, "crlkit.log"), path)
        with open(path) as f:
            text = f.read()
        self.assertIn("inside the run", text)
        self.assertNotIn("after the run", text)

    def test_empty_name_skips(self):
        CONF.set_override("results_logfile", "", group="logging")
        with log.results_log(self.root) as path:
            logger.warning("nowhere")
        self.assertIsNone(path)
        self.assertFalse(os.path.exists(self.root))
