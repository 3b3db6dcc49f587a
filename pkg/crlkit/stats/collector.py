import logging
from typing import Protocol, runtime_checkable


LOG = logging.getLogger("CRLKIT")


@runtime_checkable
class StatsProducer(Protocol):
    """The StatsProducer protocol is used to define the interface for collecting stats."""
    def stats(self, serializable=False) -> dict:
        """provide stats in a dictionary format."""
        ...


class Collector:
    """Collects stats from the StatsProducers of one run.

    Unlike a process wide registry, every training run builds its own so
    parallel runs never see each other's producers.
    """
    def __init__(self):
        self.producers: dict = {}

    def collect(self, serializable=False) -> dict:
        stats = {}
        for name, producer in self.producers.items():
            try:
                stats[name] = producer.stats(serializable=serializable).copy()
            except Exception as e:
                LOG.error(f"Error in producer {name} (stats): {e}")
        return stats

    def register_producer(self, name: str, producer):
        if not isinstance(producer, StatsProducer):
            raise TypeError(f"{producer} is not an instance of StatsProducer")
        self.producers[name] = producer
