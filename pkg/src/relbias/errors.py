"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model, dataset, split or experiment was mis-specified."""


class TrainingDiverged(RuntimeError):
    """A training run produced a non-finite loss and was aborted."""

    def __init__(self, message: str, epoch: int | None = None, seed: int | None = None):
        super().__init__(message)
        self.epoch = epoch
        self.seed = seed
