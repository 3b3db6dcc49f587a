from crlkit.stats import collector


def run_collector(loop) -> collector.Collector:
    """Collector over everything a training loop owns."""
    stats_collector = collector.Collector()
    stats_collector.register_producer("agent", loop.agent)
    stats_collector.register_producer("multipliers", loop.bank)
    stats_collector.register_producer("replay", loop.buffer)
    return stats_collector
