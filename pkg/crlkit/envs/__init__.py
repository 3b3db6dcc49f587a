from crlkit.envs.arena import (  # noqa: F401
    ACTION_DIM, BEHAVIOR_EVENTS, SUCCESS_EVENT, ArenaConfig, ArenaState,
    MiniArena, ObservationField, ObservationSpec,
)
from crlkit.envs.diagnostic import (  # noqa: F401
    DIAGNOSTIC_EVENT, DiagnosticArena, DiagnosticConfig,
)


def make_env(arena_config, diagnostic_config=None):
    """The diagnostic arena when a diagnostic config is given."""
    if diagnostic_config is not None:
        return DiagnosticArena(arena_config, diagnostic_config)
    return MiniArena(arena_config)
