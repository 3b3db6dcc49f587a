from crlkit.agents.loop import (  # noqa: F401
    MultiplierTrace, StepMetrics, TrainingLoop,
)
from crlkit.agents.sac import (  # noqa: F401
    AgentConfig, CriticBank, CriticHead, PolicyModel, SACAgent, load_policy,
    q_target,
)
