"""Exception types shared across the package."""


class ParamError(ValueError):
    """A model parameter or state value violates its documented range."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConfigError(ValueError):
    """A scenario config value is invalid; ``path`` names the offending key."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class SimulationError(RuntimeError):
    """The simulation aborted; ``step_index`` is the failing timestep."""

    def __init__(self, step_index, message):
        self.step_index = step_index
        super().__init__(f"step {step_index}: {message}")


class InfeasibleHorizon(RuntimeError):
    """No penalty-free input sequence was found over the horizon."""


class DegenerateGain(ValueError):
    """Weight gain is non-positive, so the conversion ratio is undefined."""


class UndefinedReward(ValueError):
    """A hybrid reward was requested for a step with an infeasible solve."""
